#include "waveris/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

#include "waveris/io.hpp"

namespace waveris {

namespace {

struct RunContext {
    VaractorBiasTable table;
    UnitCellCircuit circuit;
    PhaseVoltageMap map;
    CellResponse cell;
    BiasLineGeometry geometry;
    ArrayScenario scenario;
};

RunContext make_context(const ScenarioConfig& cfg) {
    VaractorBiasTable table = cfg.varactor_file.empty() ? VaractorBiasTable::smv1231()
                                                        : load_varactor_table(cfg.varactor_file);
    UnitCellCircuit circuit = UnitCellCircuit::reference_cell();
    PhaseVoltageMap map(circuit, table, cfg.carrier_freq);
    CellResponse cell(circuit, table, cfg.carrier_freq);
    return {std::move(table), circuit, std::move(map), std::move(cell), cfg.geometry(),
            cfg.scenario()};
}

std::string out_path(const ScenarioConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.out_dir);
    return (std::filesystem::path(cfg.out_dir) / name).string();
}

void unwrap_inplace(std::vector<double>& phases) {
    double offset = 0.0;
    for (std::size_t i = 1; i < phases.size(); ++i) {
        const double raw = phases[i] + offset;
        double d = raw - phases[i - 1];
        while (d > kPi) {
            offset -= kTwoPi;
            d -= kTwoPi;
        }
        while (d < -kPi) {
            offset += kTwoPi;
            d += kTwoPi;
        }
        phases[i] = phases[i - 1] + d;
    }
}

struct StageLine {
    std::string name;
    double value_db = 0.0;
};

void write_pattern_files(const ScenarioConfig& cfg, const ReflectionState& state) {
    const ArrayScenario scn = cfg.scenario();
    const auto grid = pattern_grid(deg_to_rad(-90.0), deg_to_rad(90.0),
                                   deg_to_rad(cfg.pattern_step_deg));
    const auto pattern = radiation_pattern(scn, state, grid);
    double peak = pattern.front().gain_db;
    for (const auto& p : pattern) {
        peak = std::max(peak, p.gain_db);
    }
    const double floor_db = peak - 100.0;

    CsvTable csv;
    csv.header = {"theta_deg", "gain_dB"};
    for (const auto& p : pattern) {
        csv.rows.push_back({rad_to_deg(p.theta_rad), std::max(p.gain_db, floor_db)});
    }
    write_csv(csv, out_path(cfg, "pattern.csv"));

    std::string meta;
    meta += "desired_deg = ";
    for (std::size_t i = 0; i < cfg.desired_deg.size(); ++i) {
        meta += (i ? ", " : "") + format_double(cfg.desired_deg[i]);
    }
    meta += "\nundesired_deg = ";
    for (std::size_t i = 0; i < cfg.undesired_deg.size(); ++i) {
        meta += (i ? ", " : "") + format_double(cfg.undesired_deg[i]);
    }
    meta += "\npeak_gain_db = " + format_double(peak);
    meta += "\nfloor_db = " + format_double(floor_db);
    meta += "\n";
    atomic_write_file(out_path(cfg, "pattern.meta"), meta);
}

void write_voltages_csv(const ScenarioConfig& cfg, const BiasVoltages& v) {
    CsvTable csv;
    csv.header = {"m", "V_volts"};
    for (std::size_t m = 0; m < v.v.size(); ++m) {
        csv.rows.push_back({static_cast<double>(m), v.v[m]});
    }
    write_csv(csv, out_path(cfg, "voltages.csv"));
}

std::string report_header(const ScenarioConfig& cfg) {
    std::string r = "# waveris run report\n\n[config]\n";
    r += cfg.canonical();
    return r;
}

void append_beam_table(std::string& r, const ArrayScenario& scn, const ReflectionState& state) {
    r += "\n[beams]\n";
    for (std::size_t i = 0; i < scn.desired_dirs.size(); ++i) {
        const double th = scn.desired_dirs[i];
        r += "theta_deg = " + format_double(rad_to_deg(th));
        r += ", gain_db = " + format_double(to_db(directed_power(scn, state, th)));
        r += ", snr_db = " + format_double(to_db(snr(scn, state, th)));
        r += "\n";
    }
    if (!scn.undesired_dirs.empty()) {
        r += "\n[nulls]\n";
        for (const double th : scn.undesired_dirs) {
            r += "theta_deg = " + format_double(rad_to_deg(th));
            r += ", gain_db = " + format_double(to_db(directed_power(scn, state, th)));
            r += "\n";
        }
        r += "\nslnr_db = " + format_double(to_db(slnr(scn, state))) + "\n";
    } else if (!scn.desired_dirs.empty()) {
        r += "\nslnr_db = " + format_double(to_db(slnr(scn, state))) + "\n";
    }
}

void append_weights(std::string& r, const ModeWeights& w) {
    r += "\n[weights]\n";
    r += "W0 = " + format_double(w.dc) + "\n";
    for (std::size_t n = 0; n < w.amplitude.size(); ++n) {
        r += "W" + std::to_string(n + 1) + " = " + format_double(w.amplitude[n]) + "\n";
    }
}

void append_voltages(std::string& r, const BiasVoltages& v) {
    r += "\n[voltages]\n";
    for (std::size_t m = 0; m < v.v.size(); ++m) {
        r += std::to_string(m) + " = " + format_double(v.v[m]) + "\n";
    }
}

void append_repairs(std::string& r, const std::vector<WlsRepairEvent>& events) {
    r += "\n[wls_repair]\n";
    r += "passes_with_violation = " + std::to_string(events.size()) + "\n";
    for (const auto& e : events) {
        r += "pass " + std::to_string(e.pass) + ": element " + std::to_string(e.element) +
             " at " + format_double(e.voltage) + " V hit the " + (e.low ? "lower" : "upper") +
             " bound\n";
    }
}

} // namespace

int cmd_model(const ScenarioConfig& cfg, std::ostream& log) {
    cfg.validate();
    const RunContext ctx = make_context(cfg);

    const auto steps =
        static_cast<std::size_t>(std::floor((cfg.model_f_stop - cfg.model_f_start) /
                                            cfg.model_f_step + 0.5));
    CsvTable csv;
    csv.header = {"f_GHz", "V_volts", "mag", "phase_deg"};

    const double v_min = ctx.table.min_bias();
    const double v_max = ctx.table.max_bias();
    const auto v_count = static_cast<std::size_t>(
        std::llround((v_max - v_min) / PhaseVoltageMap::kVoltageStep)) + 1;

    double best_span = 0.0;
    double best_f = cfg.model_f_start;
    std::vector<double> phases(v_count);
    for (std::size_t k = 0; k <= steps; ++k) {
        const double f = cfg.model_f_start + static_cast<double>(k) * cfg.model_f_step;
        for (std::size_t i = 0; i < v_count; ++i) {
            const double v =
                std::min(v_min + static_cast<double>(i) * PhaseVoltageMap::kVoltageStep, v_max);
            const Complex phi = reflection_coefficient(ctx.circuit, ctx.table, v, f);
            phases[i] = std::arg(phi);
            csv.rows.push_back({f / 1e9, v, std::abs(phi), rad_to_deg(phases[i])});
        }
        unwrap_inplace(phases);
        const auto [lo, hi] = std::minmax_element(phases.begin(), phases.end());
        const double span = rad_to_deg(*hi - *lo);
        if (span > best_span) {
            best_span = span;
            best_f = f;
        }
    }
    write_csv(csv, out_path(cfg, "reflection.csv"));

    std::string summary = report_header(cfg);
    summary += "\n[summary]\n";
    summary += "frequencies = " + std::to_string(steps + 1) + "\n";
    summary += "voltage_rows_per_frequency = " + std::to_string(v_count) + "\n";
    summary += "max_phase_span_deg = " + format_double(best_span) + "\n";
    summary += "max_phase_span_f_GHz = " + format_double(best_f / 1e9) + "\n";
    atomic_write_file(out_path(cfg, "model_report.txt"), summary);
    log << "model: max phase span " << best_span << " deg at " << best_f / 1e9 << " GHz\n";
    return 0;
}

int cmd_optimize(const ScenarioConfig& cfg, std::ostream& log) {
    cfg.validate();
    const RunContext ctx = make_context(cfg);
    const ArrayScenario& scn = ctx.scenario;
    const bool has_nulls = !scn.undesired_dirs.empty();

    std::vector<StageLine> stages;
    ReflectionState final_state;
    std::optional<ModeWeights> final_weights;
    std::optional<BiasVoltages> final_voltages;
    std::vector<WlsRepairEvent> repairs;
    std::vector<RangeViolation> range_excess;

    const auto beam_db = [&](const ReflectionState& st) {
        return to_db(slnr(scn, st));
    };

    if (cfg.algorithm == "ideal") {
        final_state = has_nulls
                          ? null_steer(scn, scn.desired_dirs, scn.undesired_dirs, cfg.null_steer)
                                .state
                          : multi_beam_phases(scn, scn.desired_dirs);
        stages.push_back({"ideal", beam_db(final_state)});
    } else if (cfg.algorithm == "arbitrary") {
        const ReflectionState ideal =
            has_nulls ? null_steer_projected(scn, ctx.map, scn.desired_dirs, scn.undesired_dirs,
                                             cfg.null_steer)
                            .state
                      : multi_beam_phases(scn, scn.desired_dirs);
        auto arb = arbitrary_voltage_state(ctx.map, ctx.cell, ideal);
        stages.push_back({"ideal", beam_db(ideal)});
        stages.push_back({"arbitrary", beam_db(arb.state)});
        final_state = std::move(arb.state);
        final_voltages = std::move(arb.voltages);
    } else if (cfg.algorithm == "envelope-wr-bf") {
        if (cfg.sampler != "envelope") {
            throw std::invalid_argument("algorithm envelope-wr-bf requires sampler = envelope");
        }
        if (scn.desired_dirs.size() != 1 || has_nulls) {
            throw std::invalid_argument(
                "algorithm envelope-wr-bf maximises power toward a single direction");
        }
        const double theta = scn.desired_dirs[0];
        const auto ranked = weight_ranking(ctx.geometry, scn, ctx.cell, theta);
        log << "weight ranking: top mode " << ranked.front().mode << " at "
            << to_db(ranked.front().best_power) << " dB\n";
        stages.push_back({"single_mode", to_db(ranked.front().best_power)});
        std::vector<std::size_t> order;
        order.reserve(ranked.size());
        for (const auto& r : ranked) {
            order.push_back(r.mode);
        }
        const auto bf = brute_force(ctx.geometry, scn, ctx.cell, theta, order, cfg.brute_force);
        stages.push_back({"brute_force", to_db(bf.power)});
        final_weights = bf.weights;
        final_voltages = bf.voltages;
        final_state = realize_state(ctx.cell, bf.voltages);
    } else if (cfg.algorithm == "sh-ls" || cfg.algorithm == "sh-wls") {
        if (cfg.sampler != "sh") {
            throw std::invalid_argument("algorithm " + cfg.algorithm + " requires sampler = sh");
        }
        if (has_nulls) {
            throw std::invalid_argument("algorithm " + cfg.algorithm +
                                        " forms beams only; use algorithm = combined for nulls");
        }
        const ReflectionState ideal = multi_beam_phases(scn, scn.desired_dirs);
        stages.push_back({"ideal", beam_db(ideal)});
        auto arb = arbitrary_voltage_state(ctx.map, ctx.cell, ideal);
        stages.push_back({"arbitrary", beam_db(arb.state)});
        if (cfg.algorithm == "sh-ls") {
            final_weights = ls_fit(ctx.geometry, arb.voltages, cfg.sample_time());
            BiasVoltages raw = sample_hold(ctx.geometry, *final_weights, cfg.sample_time());
            // the plain fit has no boundary repair; the varactor saturates at
            // the range ends, so out-of-range samples are clamped and logged
            range_excess = validate_range(raw);
            for (auto& v : raw.v) {
                v = std::min(std::max(v, kBiasMinVolt), kBiasMaxVolt);
            }
            final_voltages = std::move(raw);
        } else {
            auto fit = wls_fit(ctx.geometry, ctx.map, arb.voltages, cfg.sample_time());
            repairs = fit.repairs;
            final_weights = std::move(fit.weights);
            final_voltages = std::move(fit.sampled);
        }
        final_state = realize_state(ctx.cell, *final_voltages);
        stages.push_back({"wave", beam_db(final_state)});
    } else if (cfg.algorithm == "sa") {
        const SamplerKind kind = cfg.sampler_kind();
        const ModeWeights init = sa_init(ctx.geometry, scn, kind, scn.spacing_wavelengths);
        SAConfig sa_cfg = cfg.annealing;
        sa_cfg.seed = cfg.seed;
        const auto sa = simulated_annealing(ctx.geometry, scn, ctx.cell, kind, init, sa_cfg);
        stages.push_back({"init", sa.trace.front().slnr_db});
        stages.push_back({"annealed", sa.slnr_db});
        final_weights = sa.weights;
        BiasSampler sampler(ctx.geometry, kind);
        final_voltages = sampler.sample(*final_weights);
        final_state = realize_state(ctx.cell, *final_voltages);
    } else if (cfg.algorithm == "combined") {
        if (cfg.sampler != "sh") {
            throw std::invalid_argument("algorithm combined requires sampler = sh");
        }
        SAConfig sa_cfg = cfg.annealing;
        sa_cfg.seed = cfg.seed;
        const auto res = combined(ctx.geometry, scn, ctx.map, ctx.cell, cfg.sample_time(),
                                  sa_cfg, cfg.null_steer);
        stages.push_back({"ideal", res.slnr_ideal_db});
        stages.push_back({"arbitrary", res.slnr_arbitrary_db});
        stages.push_back({"wls", res.slnr_wls_db});
        stages.push_back({"annealed", res.slnr_final_db});
        repairs = res.wls.repairs;
        final_weights = res.weights;
        final_voltages = res.voltages;
        final_state = res.state;
    } else {
        throw std::invalid_argument("algorithm: unknown value '" + cfg.algorithm + "'");
    }

    write_pattern_files(cfg, final_state);
    if (final_voltages) {
        write_voltages_csv(cfg, *final_voltages);
    }
    if (final_weights) {
        save_weights(*final_weights, out_path(cfg, "weights.txt"));
    }

    std::string report = report_header(cfg);
    report += "\n[stages]\n";
    for (const auto& s : stages) {
        report += s.name + "_slnr_db = " + format_double(s.value_db) + "\n";
    }
    append_beam_table(report, scn, final_state);
    if (final_weights) {
        append_weights(report, *final_weights);
    }
    if (final_voltages) {
        append_voltages(report, *final_voltages);
    }
    append_repairs(report, repairs);
    if (!range_excess.empty()) {
        report += "\n[range_clamped]\n";
        for (const auto& v : range_excess) {
            report += "element " + std::to_string(v.element) + " excess " +
                      format_double(v.excess) + " V\n";
        }
    }
    atomic_write_file(out_path(cfg, "report.txt"), report);

    for (const auto& s : stages) {
        log << s.name << ": " << s.value_db << " dB\n";
    }
    return 0;
}

int cmd_sweep(const ScenarioConfig& cfg, std::ostream& log) {
    cfg.validate();
    if (cfg.sweep_m_list.empty() || cfg.sweep_n_list.empty()) {
        throw std::invalid_argument("sweep: M and N lists must be nonempty");
    }
    const RunContext ctx = make_context(cfg);

    SweepSpec spec;
    spec.left_extension = cfg.left_extension;
    spec.right_extension = cfg.right_extension;
    spec.element_spacing = cfg.element_spacing;
    spec.fundamental_freq = cfg.fundamental_freq;
    spec.sample_time = cfg.sample_time();
    spec.symbol_power = cfg.symbol_power;
    spec.noise_power = cfg.noise_power;
    for (double d : cfg.desired_deg) {
        spec.desired_rad.push_back(deg_to_rad(d));
    }
    for (double d : cfg.undesired_deg) {
        spec.undesired_rad.push_back(deg_to_rad(d));
    }
    spec.m_list = cfg.sweep_m_list;
    spec.n_list = cfg.sweep_n_list;
    spec.trials = cfg.sweep_trials;
    spec.selection = cfg.selection();
    spec.sa = cfg.annealing;
    spec.null_cfg = cfg.null_steer;
    spec.base_seed = cfg.seed;
    spec.threads = cfg.threads;

    const auto rows = slnr_sweep(spec, ctx.map, ctx.cell);
    atomic_write_file(out_path(cfg, "sweep.csv"), sweep_to_string(rows));
    for (const auto& r : rows) {
        log << "M=" << r.element_count << " N=" << r.mode_count << " " << r.selection << ": "
            << r.mean_slnr_db << " dB (std " << r.std_slnr_db << ", trials " << r.trials << ")\n";
    }
    return 0;
}

void save_weights(const ModeWeights& weights, const std::string& path) {
    std::string text = "W0 = " + format_double(weights.dc) + "\n";
    for (std::size_t n = 0; n < weights.amplitude.size(); ++n) {
        text += "W" + std::to_string(n + 1) + " = " + format_double(weights.amplitude[n]) + "\n";
    }
    atomic_write_file(path, text);
}

ModeWeights load_weights(const std::string& path) {
    std::istringstream in(read_file(path));
    std::string line;
    ModeWeights w;
    std::size_t expect = 0;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos || line[0] != 'W') {
            throw std::runtime_error("weights file: expected 'W<k> = <value>'");
        }
        const auto k = static_cast<std::size_t>(std::stoul(line.substr(1, eq - 1)));
        if (k != expect) {
            throw std::runtime_error("weights file: indices must be contiguous from 0");
        }
        const double value = parse_double(line.substr(eq + 1));
        if (k == 0) {
            w.dc = value;
        } else {
            w.amplitude.push_back(value);
        }
        ++expect;
    }
    if (expect == 0) {
        throw std::runtime_error("weights file: empty");
    }
    return w;
}

std::string sweep_to_string(const std::vector<SweepRow>& rows) {
    std::string text = "M, N, selection, mean_slnr_dB, std_dB, trials\n";
    for (const auto& r : rows) {
        text += std::to_string(r.element_count) + ", " + std::to_string(r.mode_count) + ", " +
                r.selection + ", " + format_double(r.mean_slnr_db) + ", " +
                format_double(r.std_slnr_db) + ", " + std::to_string(r.trials) + "\n";
    }
    return text;
}

std::vector<SweepRow> parse_sweep_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "M, N, selection, mean_slnr_dB, std_dB, trials") {
        throw std::runtime_error("sweep csv: bad header");
    }
    std::vector<SweepRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> fields;
        std::string cur;
        for (char ch : line) {
            if (ch == ',') {
                fields.push_back(cur);
                cur.clear();
            } else {
                cur += ch;
            }
        }
        fields.push_back(cur);
        if (fields.size() != 6) {
            throw std::runtime_error("sweep csv: bad row");
        }
        for (auto& f : fields) {
            while (!f.empty() && f.front() == ' ') {
                f.erase(f.begin());
            }
        }
        SweepRow r;
        r.element_count = static_cast<std::size_t>(std::stoul(fields[0]));
        r.mode_count = static_cast<std::size_t>(std::stoul(fields[1]));
        r.selection = fields[2];
        r.mean_slnr_db = parse_double(fields[3]);
        r.std_slnr_db = parse_double(fields[4]);
        r.trials = static_cast<std::size_t>(std::stoul(fields[5]));
        rows.push_back(std::move(r));
    }
    return rows;
}

} // namespace waveris
