#include "waveris/optimize.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include <Eigen/Dense>

#include "waveris/rng.hpp"

namespace waveris {

namespace {

constexpr double kZeroPhaseTie = 1e-12;

Complex unit_phase(Complex z) {
    if (std::abs(z) < kZeroPhaseTie) {
        return Complex(1.0, 0.0); // undefined phase: deterministic tie-break
    }
    const double a = std::arg(z);
    return Complex(std::cos(a), std::sin(a));
}

std::size_t ls_mode_limit(const BiasLineGeometry& g) {
    return g.element_count - 2 + std::min<std::size_t>(g.left_extension, 1) +
           std::min<std::size_t>(g.right_extension, 1);
}

void check_rank_condition(const BiasLineGeometry& g) {
    if (g.mode_count > ls_mode_limit(g)) {
        throw std::invalid_argument(
            "least squares: mode count exceeds M - 2 + min(M_l,1) + min(M_r,1) = " +
            std::to_string(ls_mode_limit(g)));
    }
}

double worst_violation(const BiasVoltages& v) {
    double worst = 0.0;
    for (const auto& viol : validate_range(v)) {
        worst = std::max(worst, std::abs(viol.excess));
    }
    return worst;
}

} // namespace

void BruteForceConfig::validate() const {
    if (!(step_floor > 0.0) || !(step_floor < initial_step)) {
        throw std::invalid_argument("brute force: requires 0 < step_floor < initial_step");
    }
}

void SAConfig::validate() const {
    if (perturbation < 0.0 || cooling <= 0.0 || max_iterations < 1) {
        throw std::invalid_argument("annealing: requires lambda >= 0, k_c > 0, iterations >= 1");
    }
}

void NullSteerConfig::validate() const {
    if (threshold <= 0.0 || max_passes < 1) {
        throw std::invalid_argument("null steering: requires threshold > 0 and passes >= 1");
    }
}

ReflectionState realize_state(const CellResponse& cell, const BiasVoltages& voltages) {
    return {cell.reflections(voltages.v)};
}

ReflectionState ideal_phases(const ArrayScenario& scenario, double theta_rad) {
    const double k = scenario.kappa(theta_rad);
    ReflectionState state;
    state.phi.resize(scenario.element_count);
    for (std::size_t m = 0; m < scenario.element_count; ++m) {
        const double a = static_cast<double>(m) * k;
        state.phi[m] = Complex(std::cos(a), std::sin(a));
    }
    return state;
}

ReflectionState multi_beam_phases(const ArrayScenario& scenario,
                                  const std::vector<double>& desired_rad) {
    if (desired_rad.empty()) {
        throw std::invalid_argument("multi_beam_phases: needs at least one direction");
    }
    ReflectionState acc;
    acc.phi.assign(scenario.element_count, Complex(0.0, 0.0));
    for (double th : desired_rad) {
        const ReflectionState one = ideal_phases(scenario, th);
        for (std::size_t m = 0; m < acc.phi.size(); ++m) {
            acc.phi[m] += one.phi[m];
        }
    }
    const double inv_k = 1.0 / static_cast<double>(desired_rad.size());
    for (auto& z : acc.phi) {
        z = unit_phase(z * inv_k);
    }
    return acc;
}

ArbitraryVoltageResult arbitrary_voltage_state(const PhaseVoltageMap& map,
                                               const CellResponse& cell,
                                               const ReflectionState& ideal) {
    ArbitraryVoltageResult out;
    out.voltages.v.reserve(ideal.phi.size());
    out.state.phi.reserve(ideal.phi.size());
    for (const Complex& z : ideal.phi) {
        const double v = map.voltage_of_phase(std::arg(z));
        out.voltages.v.push_back(v);
        out.state.phi.push_back(cell.reflection(v));
    }
    return out;
}

std::vector<RankedMode> weight_ranking(const BiasLineGeometry& geometry,
                                       const ArrayScenario& scenario, const CellResponse& cell,
                                       double theta_rad) {
    geometry.validate();
    const std::size_t m_count = geometry.element_count;
    const DirectionBank bank(scenario, {theta_rad}, {});
    const double span = kBiasMaxVolt - kBiasMinVolt;
    constexpr double kStep = 0.001;

    std::vector<RankedMode> ranked;
    ranked.reserve(geometry.mode_count);
    ReflectionState state;
    state.phi.resize(m_count);
    std::vector<double> spatial_abs(m_count);

    for (std::size_t n = 1; n <= geometry.mode_count; ++n) {
        double s_max = 0.0;
        for (std::size_t m = 0; m < m_count; ++m) {
            spatial_abs[m] = std::abs(geometry.spatial_sine(n, m));
            s_max = std::max(s_max, spatial_abs[m]);
        }
        // baseline: amplitude zero, every element at the DC level
        const Complex phi0 = cell.reflection(kBiasMaxVolt);
        for (std::size_t m = 0; m < m_count; ++m) {
            state.phi[m] = phi0;
        }
        double best = bank.min_desired_power(state);
        if (s_max > 0.0) {
            // envelope bias is W_0 - |a s_n(m)|: invariant under the sign of a,
            // so one sweep over positive amplitudes covers both signs
            const double cap = span / s_max;
            const auto steps = static_cast<std::size_t>(std::floor(cap / kStep + 1e-9));
            for (std::size_t k = 1; k <= steps; ++k) {
                const double a = static_cast<double>(k) * kStep;
                for (std::size_t m = 0; m < m_count; ++m) {
                    state.phi[m] = cell.reflection(kBiasMaxVolt - a * spatial_abs[m]);
                }
                best = std::max(best, bank.min_desired_power(state));
            }
        }
        ranked.push_back({n, best});
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const RankedMode& a, const RankedMode& b) {
                         return a.best_power > b.best_power;
                     });
    return ranked;
}

BruteForceResult brute_force(const BiasLineGeometry& geometry, const ArrayScenario& scenario,
                             const CellResponse& cell, double theta_rad,
                             const std::vector<std::size_t>& order, const BruteForceConfig& cfg) {
    cfg.validate();
    geometry.validate();
    if (order.size() != geometry.mode_count) {
        throw std::invalid_argument("brute force: order must list every mode exactly once");
    }
    EnvelopeSampler sampler(geometry);
    const DirectionBank bank(scenario, {theta_rad}, {});

    BruteForceResult result;
    result.weights = ModeWeights::zeros(geometry.mode_count, kBiasMaxVolt);
    result.voltages = sampler.sample(result.weights);
    result.power = bank.min_desired_power(realize_state(cell, result.voltages));
    result.accepted_powers.push_back(result.power);

    double mu = cfg.initial_step;
    while (mu >= cfg.step_floor) {
        for (std::size_t mode : order) {
            const std::size_t idx = mode - 1;
            double step = mu;
            bool negated = false;
            while (true) {
                ModeWeights trial = result.weights;
                trial.amplitude[idx] += step;
                const BiasVoltages tv = sampler.sample(trial);
                ++result.evaluations;
                bool reject = !validate_range(tv).empty();
                double p_new = 0.0;
                if (!reject) {
                    p_new = bank.min_desired_power(realize_state(cell, tv));
                    reject = !(p_new > result.power);
                }
                if (!reject) {
                    result.weights = std::move(trial);
                    result.voltages = tv;
                    result.power = p_new;
                    result.accepted_powers.push_back(p_new);
                    continue; // keep climbing in the same direction
                }
                if (!negated) {
                    step = -step;
                    negated = true;
                    continue;
                }
                break; // both directions exhausted at this step size
            }
        }
        mu /= 2.0;
    }
    return result;
}

ModeWeights ls_fit(const BiasLineGeometry& geometry, const BiasVoltages& target,
                   double sample_time_s) {
    geometry.validate();
    check_rank_condition(geometry);
    if (target.v.size() != geometry.element_count) {
        throw std::invalid_argument("ls_fit: target length does not match element count");
    }
    const HoldSampler sampler(geometry, sample_time_s);
    const Eigen::MatrixXd& features = sampler.feature_matrix();

    ModeWeights out;
    out.dc = std::accumulate(target.v.begin(), target.v.end(), 0.0) /
             static_cast<double>(target.v.size());
    Eigen::VectorXd residual(static_cast<Eigen::Index>(target.v.size()));
    for (std::size_t m = 0; m < target.v.size(); ++m) {
        residual[static_cast<Eigen::Index>(m)] = target.v[m] - out.dc;
    }
    const Eigen::MatrixXd gram = features.transpose() * features;
    const Eigen::VectorXd rhs = features.transpose() * residual;
    const Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error("ls_fit: normal equations are not positive definite");
    }
    const Eigen::VectorXd w = llt.solve(rhs);
    out.amplitude.assign(w.data(), w.data() + w.size());
    return out;
}

std::vector<double> wls_weights(const PhaseVoltageMap& map, const BiasVoltages& target) {
    constexpr double kStep = 0.001; // 1 mV derivative grid
    const double v_min = map.min_voltage();
    const double v_max = map.max_voltage();
    const auto count = static_cast<std::size_t>(std::floor((v_max - v_min) / kStep + 0.5));

    std::vector<double> slope(count);
    double peak = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        const double v = v_min + static_cast<double>(k) * kStep;
        const double hi = std::min(v + kStep, v_max);
        slope[k] = std::abs(map.phase_of_voltage(hi) - map.phase_of_voltage(v)) / (hi - v);
        peak = std::max(peak, slope[k]);
    }
    std::vector<double> alpha;
    alpha.reserve(target.v.size());
    for (double v : target.v) {
        auto idx = static_cast<long>(std::floor((v - v_min) / kStep));
        idx = std::clamp<long>(idx, 0, static_cast<long>(count) - 1);
        alpha.push_back(slope[static_cast<std::size_t>(idx)] / peak + 0.001);
    }
    return alpha;
}

namespace {

WlsResult wls_fit_masked(const BiasLineGeometry& geometry, const PhaseVoltageMap& map,
                         const BiasVoltages& target, double sample_time_s,
                         std::size_t max_passes, const std::vector<bool>* mask) {
    geometry.validate();
    check_rank_condition(geometry);
    if (target.v.size() != geometry.element_count) {
        throw std::invalid_argument("wls_fit: target length does not match element count");
    }
    const HoldSampler sampler(geometry, sample_time_s);
    const auto m_count = static_cast<Eigen::Index>(geometry.element_count);

    // active columns of the feature matrix
    std::vector<std::size_t> cols;
    for (std::size_t n = 0; n < geometry.mode_count; ++n) {
        if (mask == nullptr || (*mask)[n]) {
            cols.push_back(n);
        }
    }
    Eigen::MatrixXd features(m_count, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
        features.col(static_cast<Eigen::Index>(c)) =
            sampler.feature_matrix().col(static_cast<Eigen::Index>(cols[c]));
    }

    std::vector<double> alpha = wls_weights(map, target);
    std::vector<double> goal = target.v;
    const double dc = std::accumulate(goal.begin(), goal.end(), 0.0) /
                      static_cast<double>(goal.size());

    WlsResult result;
    result.weights.dc = dc;
    WlsResult best;
    double best_violation = 0.0;
    bool have_best = false;

    for (std::size_t pass = 1; pass <= max_passes; ++pass) {
        Eigen::MatrixXd weighted = features;
        Eigen::VectorXd residual(m_count);
        for (Eigen::Index m = 0; m < m_count; ++m) {
            weighted.row(m) *= alpha[static_cast<std::size_t>(m)];
            residual[m] = alpha[static_cast<std::size_t>(m)] *
                          (goal[static_cast<std::size_t>(m)] - dc);
        }
        const Eigen::MatrixXd gram = features.transpose() * weighted;
        const Eigen::VectorXd rhs = features.transpose() * residual;
        const Eigen::LLT<Eigen::MatrixXd> llt(gram);
        if (llt.info() != Eigen::Success) {
            throw std::runtime_error("wls_fit: weighted normal equations not positive definite");
        }
        const Eigen::VectorXd w = llt.solve(rhs);

        result.weights.dc = dc;
        result.weights.amplitude.assign(geometry.mode_count, 0.0);
        for (std::size_t c = 0; c < cols.size(); ++c) {
            result.weights.amplitude[cols[c]] = w[static_cast<Eigen::Index>(c)];
        }
        result.sampled = sampler.sample(result.weights);

        const double violation = worst_violation(result.sampled);
        if (violation == 0.0) {
            return result;
        }
        if (!have_best || violation < best_violation) {
            best = result;
            best_violation = violation;
            have_best = true;
        }

        // tighten at the single extremal element
        const auto min_it = std::min_element(result.sampled.v.begin(), result.sampled.v.end());
        const auto max_it = std::max_element(result.sampled.v.begin(), result.sampled.v.end());
        if (*min_it < kBiasMinVolt) {
            const auto i = static_cast<std::size_t>(min_it - result.sampled.v.begin());
            alpha[i] *= 2.0;
            goal[i] += 0.005;
            result.repairs.push_back({pass, i, *min_it, true});
        } else if (*max_it > kBiasMaxVolt) {
            const auto i = static_cast<std::size_t>(max_it - result.sampled.v.begin());
            alpha[i] *= 2.0;
            goal[i] -= 0.005;
            result.repairs.push_back({pass, i, *max_it, false});
        }
        best.repairs = result.repairs;
    }
    throw WlsRepairError("wls_fit: boundary repair did not converge within " +
                             std::to_string(max_passes) + " passes",
                         std::move(best));
}

} // namespace

WlsResult wls_fit(const BiasLineGeometry& geometry, const PhaseVoltageMap& map,
                  const BiasVoltages& target, double sample_time_s, std::size_t max_passes) {
    return wls_fit_masked(geometry, map, target, sample_time_s, max_passes, nullptr);
}

SaResult simulated_annealing(const BiasLineGeometry& geometry, const ArrayScenario& scenario,
                             const CellResponse& cell, const SamplerKind& kind,
                             const ModeWeights& init, const SAConfig& cfg,
                             const std::vector<bool>* active) {
    cfg.validate();
    geometry.validate();
    if (scenario.desired_dirs.empty()) {
        throw std::invalid_argument("annealing: scenario needs at least one desired direction");
    }
    if (init.amplitude.size() != geometry.mode_count) {
        throw std::invalid_argument("annealing: init weight count does not match geometry");
    }
    if (active != nullptr && active->size() != geometry.mode_count) {
        throw std::invalid_argument("annealing: active mask size does not match geometry");
    }

    BiasSampler sampler(geometry, kind);
    const DirectionBank bank(scenario, scenario.desired_dirs, scenario.undesired_dirs);
    Rng rng(cfg.seed);

    const auto objective = [&](const BiasVoltages& v) {
        return to_db(bank.slnr_linear(realize_state(cell, v)));
    };

    BiasVoltages volts = sampler.sample(init);
    if (!validate_range(volts).empty()) {
        throw std::invalid_argument("annealing: initial weights violate the bias range");
    }

    ModeWeights current = init;
    double slnr_cur = objective(volts);
    SaResult result;
    result.weights = init;
    result.slnr_db = slnr_cur;
    result.trace.reserve(cfg.max_iterations + 1);
    result.trace.push_back({slnr_cur, slnr_cur});
    std::size_t iter_best = 0;

    for (std::size_t i = 1; i <= cfg.max_iterations; ++i) {
        if (i - iter_best >= cfg.revert_patience) {
            current = result.weights;
            slnr_cur = result.slnr_db;
            iter_best = i;
        }
        const double temperature =
            100.0 * (1.0 - static_cast<double>(i) / static_cast<double>(cfg.max_iterations));

        ModeWeights proposal = current;
        for (std::size_t n = 0; n < proposal.amplitude.size(); ++n) {
            if (active == nullptr || (*active)[n]) {
                proposal.amplitude[n] += cfg.perturbation * rng.gauss();
            }
        }
        volts = sampler.sample(proposal);
        if (!validate_range(volts).empty()) {
            ++result.skipped;
            result.trace.push_back({slnr_cur, result.slnr_db});
            continue;
        }
        const double slnr_new = objective(volts);
        if (slnr_new > result.slnr_db) {
            result.slnr_db = slnr_new;
            result.weights = proposal;
            iter_best = i;
            current = std::move(proposal);
            slnr_cur = slnr_new;
        } else {
            double p = 0.0;
            if (slnr_new > slnr_cur) {
                p = 1.0;
            } else if (temperature > 0.0) {
                p = std::exp(-(slnr_cur - slnr_new) / (cfg.cooling * temperature));
            } // temperature 0 with a worse state: p stays 0
            if (p >= rng.uniform01()) {
                current = std::move(proposal);
                slnr_cur = slnr_new;
            }
        }
        result.trace.push_back({slnr_cur, result.slnr_db});
    }
    return result;
}

ModeWeights sa_init(const BiasLineGeometry& geometry, const ArrayScenario& scenario,
                    const SamplerKind& kind, double spacing_wavelengths) {
    if (scenario.desired_dirs.empty()) {
        throw std::invalid_argument("sa_init: scenario needs at least one desired direction");
    }
    const bool envelope = std::holds_alternative<EnvelopeDetector>(kind);
    ModeWeights w = ModeWeights::zeros(
        geometry.mode_count, envelope ? kBiasMaxVolt : 0.5 * (kBiasMinVolt + kBiasMaxVolt));
    const double amp = 3.0 / static_cast<double>(scenario.desired_dirs.size());
    for (double th : scenario.desired_dirs) {
        const long n = envelope
                           ? mode_index_pd(geometry.element_count, spacing_wavelengths, th)
                           : mode_index_sh(geometry.element_count, spacing_wavelengths, th);
        if (n < 1 || static_cast<std::size_t>(n) > geometry.mode_count) {
            throw std::domain_error("sa_init: predicted mode index " + std::to_string(n) +
                                    " outside the available 1.." +
                                    std::to_string(geometry.mode_count));
        }
        w.amplitude[static_cast<std::size_t>(n - 1)] += amp;
    }
    return w;
}

namespace {

NullSteerResult run_null_steer(const ArrayScenario& scenario,
                               const std::vector<double>& desired_rad,
                               const std::vector<double>& undesired_rad,
                               const NullSteerConfig& cfg, const PhaseVoltageMap* projection) {
    cfg.validate();
    if (desired_rad.empty() || undesired_rad.empty()) {
        throw std::invalid_argument("null steering: needs desired and undesired directions");
    }
    std::vector<std::vector<Complex>> steer;
    steer.reserve(undesired_rad.size());
    for (double th : undesired_rad) {
        steer.push_back(steering_channel(scenario, th));
    }

    NullSteerResult out;
    out.state = multi_beam_phases(scenario, desired_rad);
    const std::size_t m_count = out.state.phi.size();

    ReflectionState best = out.state;
    double best_residual = -1.0;

    for (std::size_t pass = 1; pass <= cfg.max_passes; ++pass) {
        for (const auto& e : steer) {
            Complex mean(0.0, 0.0);
            for (std::size_t m = 0; m < m_count; ++m) {
                mean += out.state.phi[m] * e[m];
            }
            mean /= static_cast<double>(m_count);
            for (std::size_t m = 0; m < m_count; ++m) {
                // r(m) - mean, mapped back off the steering ramp, unit modulus
                out.state.phi[m] = unit_phase((out.state.phi[m] * e[m] - mean) / e[m]);
            }
        }
        if (projection != nullptr) {
            for (auto& z : out.state.phi) {
                const double v = projection->voltage_of_phase(std::arg(z));
                const double ph = projection->phase_of_voltage(v);
                z = Complex(std::cos(ph), std::sin(ph));
            }
        }
        double residual = 0.0;
        for (const auto& e : steer) {
            Complex mean(0.0, 0.0);
            for (std::size_t m = 0; m < m_count; ++m) {
                mean += out.state.phi[m] * e[m];
            }
            residual = std::max(residual, std::abs(mean) / static_cast<double>(m_count));
        }
        out.passes = pass;
        out.residual = residual;
        if (best_residual < 0.0 || residual < best_residual) {
            best = out.state;
            best_residual = residual;
        }
        if (residual <= cfg.threshold) {
            out.converged = true;
            return out;
        }
    }
    out.state = best;
    out.residual = best_residual;
    out.converged = false;
    return out;
}

} // namespace

NullSteerResult null_steer(const ArrayScenario& scenario, const std::vector<double>& desired_rad,
                           const std::vector<double>& undesired_rad,
                           const NullSteerConfig& cfg) {
    return run_null_steer(scenario, desired_rad, undesired_rad, cfg, nullptr);
}

NullSteerResult null_steer_projected(const ArrayScenario& scenario, const PhaseVoltageMap& map,
                                     const std::vector<double>& desired_rad,
                                     const std::vector<double>& undesired_rad,
                                     const NullSteerConfig& cfg) {
    return run_null_steer(scenario, desired_rad, undesired_rad, cfg, &map);
}

CombinedResult combined(const BiasLineGeometry& geometry, const ArrayScenario& scenario,
                        const PhaseVoltageMap& map, const CellResponse& cell,
                        double sample_time_s, const SAConfig& sa_cfg,
                        const NullSteerConfig& null_cfg, std::size_t keep_strongest) {
    if (scenario.desired_dirs.empty()) {
        throw std::invalid_argument("combined: scenario needs at least one desired direction");
    }
    CombinedResult out;

    if (scenario.undesired_dirs.empty()) {
        out.null_stage.state = multi_beam_phases(scenario, scenario.desired_dirs);
        out.null_stage.converged = true;
    } else {
        out.null_stage =
            null_steer(scenario, scenario.desired_dirs, scenario.undesired_dirs, null_cfg);
    }
    out.slnr_ideal_db = to_db(slnr(scenario, out.null_stage.state));

    // voltage-projected benchmark
    if (scenario.undesired_dirs.empty()) {
        const auto arb = arbitrary_voltage_state(map, cell, out.null_stage.state);
        out.arbitrary_voltages = arb.voltages;
        out.slnr_arbitrary_db = to_db(slnr(scenario, arb.state));
    } else {
        const NullSteerResult projected = null_steer_projected(
            scenario, map, scenario.desired_dirs, scenario.undesired_dirs, null_cfg);
        const auto arb = arbitrary_voltage_state(map, cell, projected.state);
        out.arbitrary_voltages = arb.voltages;
        out.slnr_arbitrary_db = to_db(slnr(scenario, arb.state));
    }

    // fit the standing wave to the attainable voltages of the null-steered phases
    BiasVoltages target;
    target.v.reserve(out.null_stage.state.phi.size());
    for (const Complex& z : out.null_stage.state.phi) {
        target.v.push_back(map.voltage_of_phase(std::arg(z)));
    }

    std::vector<bool> mask;
    const std::vector<bool>* mask_ptr = nullptr;
    if (keep_strongest > 0 && keep_strongest < geometry.mode_count) {
        // Rank modes by the target-curve energy they capture. Joint-fit
        // coefficients cannot be used for ranking: near the rank limit the
        // Gram is almost singular, and a tiny time factor inflates a
        // coefficient without adding anything to the waveform. The projection
        // has neither problem and coincides with the fit for an orthogonal
        // basis. The kept subset is then refit so the reduced wave still
        // honours the bias range.
        const HoldSampler hold(geometry, sample_time_s);
        const double mean = std::accumulate(target.v.begin(), target.v.end(), 0.0) /
                            static_cast<double>(target.v.size());
        Eigen::VectorXd residual(static_cast<Eigen::Index>(target.v.size()));
        for (std::size_t m = 0; m < target.v.size(); ++m) {
            residual[static_cast<Eigen::Index>(m)] = target.v[m] - mean;
        }
        std::vector<double> strength(geometry.mode_count);
        for (std::size_t n = 0; n < geometry.mode_count; ++n) {
            const auto col = hold.feature_matrix().col(static_cast<Eigen::Index>(n));
            const double norm = col.norm();
            strength[n] = norm > 0.0 ? std::abs(col.dot(residual)) / norm : 0.0;
        }
        std::vector<std::size_t> idx(geometry.mode_count);
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return strength[a] > strength[b];
        });
        mask.assign(geometry.mode_count, false);
        for (std::size_t k = 0; k < keep_strongest; ++k) {
            mask[idx[k]] = true;
        }
        mask_ptr = &mask;
    }
    out.wls = wls_fit_masked(geometry, map, target, sample_time_s, 10000, mask_ptr);
    out.slnr_wls_db = to_db(slnr(scenario, realize_state(cell, out.wls.sampled)));

    out.sa = simulated_annealing(geometry, scenario, cell, SampleAndHold{sample_time_s},
                                 out.wls.weights, sa_cfg, mask_ptr);
    out.weights = out.sa.weights;
    out.voltages = sample_hold(geometry, out.weights, sample_time_s);
    out.state = realize_state(cell, out.voltages);
    out.slnr_final_db = to_db(slnr(scenario, out.state));
    return out;
}

std::string to_string(ModeSelection sel) {
    return sel == ModeSelection::FirstN ? "first_n" : "strongest_n";
}

std::vector<SweepRow> slnr_sweep(const SweepSpec& spec, const PhaseVoltageMap& map,
                                 const CellResponse& cell) {
    if (spec.m_list.empty() || spec.n_list.empty() || spec.trials == 0) {
        throw std::invalid_argument("sweep: element counts, mode counts and trials must be nonempty");
    }
    const double delta = spec.element_spacing * cell.frequency() / kSpeedOfLight;

    struct Cell {
        std::size_t m = 0;
        std::size_t n = 0;
    };
    std::vector<Cell> cells;
    for (std::size_t m : spec.m_list) {
        for (std::size_t n : spec.n_list) {
            cells.push_back({m, n});
        }
    }

    std::vector<SweepRow> rows(cells.size());
    std::atomic<std::size_t> next{0};

    const auto run_cell = [&](std::size_t ci) {
        const Cell c = cells[ci];
        BiasLineGeometry g;
        g.element_count = c.m;
        g.left_extension = spec.left_extension;
        g.right_extension = spec.right_extension;
        g.element_spacing = spec.element_spacing;
        g.fundamental_freq = spec.fundamental_freq;

        ArrayScenario scn;
        scn.element_count = c.m;
        scn.spacing_wavelengths = delta;
        scn.symbol_power = spec.symbol_power;
        scn.noise_power = spec.noise_power;
        scn.desired_dirs = spec.desired_rad;
        scn.undesired_dirs = spec.undesired_rad;
        scn.validate();

        const double t0 = spec.sample_time > 0.0 ? spec.sample_time : 8.0 / g.omega_b();

        std::size_t keep = 0;
        if (spec.selection == ModeSelection::FirstN) {
            g.mode_count = c.n;
        } else {
            g.mode_count = std::min(c.m, ls_mode_limit({c.m, spec.left_extension,
                                                        spec.right_extension, g.element_spacing,
                                                        g.fundamental_freq, 1}));
            keep = c.n;
        }
        g.validate();

        std::vector<double> finals;
        finals.reserve(spec.trials);
        for (std::size_t trial = 0; trial < spec.trials; ++trial) {
            SAConfig sa = spec.sa;
            sa.seed = mix_seed(spec.base_seed, c.m, c.n, trial);
            const CombinedResult r =
                combined(g, scn, map, cell, t0, sa, spec.null_cfg, keep);
            finals.push_back(r.slnr_final_db);
        }
        double mean = std::accumulate(finals.begin(), finals.end(), 0.0) /
                      static_cast<double>(finals.size());
        double var = 0.0;
        for (double f : finals) {
            var += (f - mean) * (f - mean);
        }
        var /= static_cast<double>(finals.size());
        rows[ci] = {c.m, c.n, to_string(spec.selection), mean, std::sqrt(var), spec.trials};
    };

    const std::size_t workers = std::max<std::size_t>(1, std::min(spec.threads, cells.size()));
    if (workers == 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            run_cell(i);
        }
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t t = 0; t < workers; ++t) {
            pool.emplace_back([&]() {
                for (std::size_t i = next.fetch_add(1); i < cells.size();
                     i = next.fetch_add(1)) {
                    run_cell(i);
                }
            });
        }
        for (auto& th : pool) {
            th.join();
        }
    }

    // per-M reference rows: ideal-phase and arbitrary-voltage null steering
    std::vector<SweepRow> out;
    for (std::size_t m : spec.m_list) {
        ArrayScenario scn;
        scn.element_count = m;
        scn.spacing_wavelengths = delta;
        scn.symbol_power = spec.symbol_power;
        scn.noise_power = spec.noise_power;
        scn.desired_dirs = spec.desired_rad;
        scn.undesired_dirs = spec.undesired_rad;

        ReflectionState ideal_state;
        BiasVoltages arb_v;
        ReflectionState arb_state;
        if (spec.undesired_rad.empty()) {
            ideal_state = multi_beam_phases(scn, spec.desired_rad);
            const auto arb = arbitrary_voltage_state(map, cell, ideal_state);
            arb_state = arb.state;
        } else {
            ideal_state =
                null_steer(scn, spec.desired_rad, spec.undesired_rad, spec.null_cfg).state;
            const auto projected = null_steer_projected(scn, map, spec.desired_rad,
                                                        spec.undesired_rad, spec.null_cfg);
            arb_state = arbitrary_voltage_state(map, cell, projected.state).state;
        }
        out.push_back({m, 0, "ideal", to_db(slnr(scn, ideal_state)), 0.0, 1});
        out.push_back({m, 0, "arbitrary", to_db(slnr(scn, arb_state)), 0.0, 1});
    }
    out.insert(out.end(), rows.begin(), rows.end());
    return out;
}

} // namespace waveris
