#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "waveris/beamform.hpp"
#include "waveris/biasline.hpp"
#include "waveris/metasurface.hpp"

namespace waveris {

struct BruteForceConfig {
    double initial_step = 1.0;  // volts
    double step_floor = 0.001;  // volts; halving stops below this

    void validate() const;
};

struct SAConfig {
    double perturbation = 0.03;      // lambda, volts per mode per step
    double cooling = 0.002;          // k_c
    std::size_t max_iterations = 2000;
    std::size_t revert_patience = 100;
    std::uint64_t seed = 1;

    void validate() const;
};

struct NullSteerConfig {
    double threshold = 1e-4;       // on |mean residual| per null direction
    std::size_t max_passes = 10000;

    void validate() const;
};

ReflectionState realize_state(const CellResponse& cell, const BiasVoltages& voltages);

// Unit-modulus coherent state for one direction: phi(m) = e^{j m kappa(theta)}.
ReflectionState ideal_phases(const ArrayScenario& scenario, double theta_rad);

// Average of the per-direction ideal states, projected back to unit modulus.
// A vanishing average (magnitude < 1e-12) deterministically maps to phase 0.
ReflectionState multi_beam_phases(const ArrayScenario& scenario,
                                  const std::vector<double>& desired_rad);

struct ArbitraryVoltageResult {
    BiasVoltages voltages;
    ReflectionState state; // realised, including |phi| < 1 losses
};

// Clamp each ideal phase to the attainable span, invert to a voltage, then
// re-evaluate the full complex reflection at that voltage.
ArbitraryVoltageResult arbitrary_voltage_state(const PhaseVoltageMap& map,
                                               const CellResponse& cell,
                                               const ReflectionState& ideal);

struct RankedMode {
    std::size_t mode = 0; // 1-based
    double best_power = 0.0;
};

// Envelope-detector mode ranking: each mode alone, amplitude swept in 1 mV
// steps up to the feasibility cap, best directed power recorded. Returns all
// modes sorted by descending best power.
std::vector<RankedMode> weight_ranking(const BiasLineGeometry& geometry,
                                       const ArrayScenario& scenario, const CellResponse& cell,
                                       double theta_rad);

struct BruteForceResult {
    ModeWeights weights;
    BiasVoltages voltages;
    double power = 0.0; // linear, at the target direction
    std::size_t evaluations = 0;
    std::vector<double> accepted_powers; // objective after each accepted step
};

// Coordinate ascent over the ranked modes with step halving; every accepted
// step keeps the sampled voltages inside the bias range.
BruteForceResult brute_force(const BiasLineGeometry& geometry, const ArrayScenario& scenario,
                             const CellResponse& cell, double theta_rad,
                             const std::vector<std::size_t>& order, const BruteForceConfig& cfg);

// Unweighted fit of the sampled wave to a target voltage curve. The DC term
// is the target mean; the amplitudes solve the normal equations over the
// hold-sampler feature vectors. Requires N <= M - 2 + min(M_l,1) + min(M_r,1).
ModeWeights ls_fit(const BiasLineGeometry& geometry, const BiasVoltages& target,
                   double sample_time_s);

// Per-element weights from the phase sensitivity |d phase / dV| on a 1 mV
// grid, normalised to [0, 1] with a 0.001 floor.
std::vector<double> wls_weights(const PhaseVoltageMap& map, const BiasVoltages& target);

struct WlsRepairEvent {
    std::size_t pass = 0;
    std::size_t element = 0;
    double voltage = 0.0; // offending sampled value
    bool low = false;     // true when it violated the lower bound
};

struct WlsResult {
    ModeWeights weights;
    BiasVoltages sampled;
    std::vector<WlsRepairEvent> repairs;
};

class WlsRepairError : public std::runtime_error {
  public:
    WlsRepairError(std::string msg, WlsResult best_iterate)
        : std::runtime_error(std::move(msg)), best(std::move(best_iterate)) {}

    WlsResult best; // least-violation iterate reached before the cap
};

// Weighted fit with boundary repair: when the sampled wave exits the bias
// range, the single extremal element gets its weight doubled and its target
// nudged 5 mV inward, and the system is re-solved.
WlsResult wls_fit(const BiasLineGeometry& geometry, const PhaseVoltageMap& map,
                  const BiasVoltages& target, double sample_time_s,
                  std::size_t max_passes = 10000);

struct SaTracePoint {
    double slnr_db = 0.0;
    double best_db = 0.0;
};

struct SaResult {
    ModeWeights weights;  // best state visited
    double slnr_db = 0.0; // its objective
    std::vector<SaTracePoint> trace;
    std::size_t skipped = 0; // proposals rejected for leaving the bias range
};

// Annealed search over the mode amplitudes; the DC term is never perturbed.
// `active`, when given, restricts perturbation to the flagged modes.
// Deterministic for a fixed config seed.
SaResult simulated_annealing(const BiasLineGeometry& geometry, const ArrayScenario& scenario,
                             const CellResponse& cell, const SamplerKind& kind,
                             const ModeWeights& init, const SAConfig& cfg,
                             const std::vector<bool>* active = nullptr);

// Start state for the annealer: amplitude 3/K at each desired direction's
// predicted mode index (duplicates accumulate), DC at mid-range for
// sample-and-hold or at the upper bias limit for the envelope detector.
ModeWeights sa_init(const BiasLineGeometry& geometry, const ArrayScenario& scenario,
                    const SamplerKind& kind, double spacing_wavelengths);

struct NullSteerResult {
    ReflectionState state;
    bool converged = false;
    std::size_t passes = 0;
    double residual = 0.0; // max over nulls of |mean(phi .* steering)|
};

// Iterative null forming on unit-modulus phases: project out each null
// direction's mean response, renormalise, repeat until every residual is
// below threshold.
NullSteerResult null_steer(const ArrayScenario& scenario, const std::vector<double>& desired_rad,
                           const std::vector<double>& undesired_rad, const NullSteerConfig& cfg);

// Variant that re-projects the phases onto the attainable span after each
// pass; its fixed point respects the bias-voltage limits.
NullSteerResult null_steer_projected(const ArrayScenario& scenario, const PhaseVoltageMap& map,
                                     const std::vector<double>& desired_rad,
                                     const std::vector<double>& undesired_rad,
                                     const NullSteerConfig& cfg);

struct CombinedResult {
    NullSteerResult null_stage;
    double slnr_ideal_db = 0.0;     // unit-modulus null-steered state
    double slnr_arbitrary_db = 0.0; // voltage-projected benchmark, realised
    BiasVoltages arbitrary_voltages;
    WlsResult wls;
    double slnr_wls_db = 0.0; // realised from the fitted wave
    SaResult sa;
    double slnr_final_db = 0.0;
    ModeWeights weights;
    BiasVoltages voltages;
    ReflectionState state;
};

// Beam-and-null pipeline: null-steered ideal phases -> attainable voltages ->
// weighted fit of the standing wave -> annealed refinement (sample-and-hold).
// With no undesired directions the null stage reduces to beam averaging.
// keep_strongest > 0 truncates the fitted weights to the that many
// largest-amplitude modes before annealing, and anneals only those.
CombinedResult combined(const BiasLineGeometry& geometry, const ArrayScenario& scenario,
                        const PhaseVoltageMap& map, const CellResponse& cell,
                        double sample_time_s, const SAConfig& sa_cfg,
                        const NullSteerConfig& null_cfg, std::size_t keep_strongest = 0);

enum class ModeSelection { FirstN, StrongestN };

std::string to_string(ModeSelection sel);

struct SweepRow {
    std::size_t element_count = 0;
    std::size_t mode_count = 0;
    std::string selection;
    double mean_slnr_db = 0.0;
    double std_slnr_db = 0.0;
    std::size_t trials = 0;
};

struct SweepSpec {
    // geometry template: extensions, spacing and f_b are shared, M and N vary
    std::size_t left_extension = 2;
    std::size_t right_extension = 2;
    double element_spacing = 0.019;
    double fundamental_freq = 12.9e6;
    double sample_time = 0.0; // t_0 seconds; 0 means 8/omega_b
    double symbol_power = 1.0;
    double noise_power = 1.0;
    std::vector<double> desired_rad;
    std::vector<double> undesired_rad;
    std::vector<std::size_t> m_list;
    std::vector<std::size_t> n_list;
    std::size_t trials = 10;
    ModeSelection selection = ModeSelection::FirstN;
    SAConfig sa;
    NullSteerConfig null_cfg;
    std::uint64_t base_seed = 1;
    std::size_t threads = 1;
};

// Mean worst-case SLNR per (M, N) cell of the combined pipeline, averaged
// over trials with per-cell derived seeds; plus per-M ideal and
// arbitrary-voltage reference rows (emitted with N = 0).
std::vector<SweepRow> slnr_sweep(const SweepSpec& spec, const PhaseVoltageMap& map,
                                 const CellResponse& cell);

} // namespace waveris
