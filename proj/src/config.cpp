#include "waveris/config.hpp"

#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "waveris/io.hpp"

namespace waveris {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) {
        ++a;
    }
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) {
        --b;
    }
    return s.substr(a, b - a);
}

double parse_with_unit(const std::string& key, const std::string& value,
                       const std::map<std::string, double>& units, bool unit_required) {
    std::istringstream ss(value);
    double num = 0.0;
    if (!(ss >> num)) {
        throw std::invalid_argument(key + ": expected a number, got '" + value + "'");
    }
    std::string unit;
    ss >> unit;
    std::string rest;
    if (ss >> rest) {
        throw std::invalid_argument(key + ": trailing text '" + rest + "'");
    }
    if (unit.empty()) {
        if (unit_required) {
            throw std::invalid_argument(key + ": unit suffix required (e.g. GHz, mm)");
        }
        return num;
    }
    const auto it = units.find(unit);
    if (it == units.end()) {
        throw std::invalid_argument(key + ": unknown unit '" + unit + "'");
    }
    return num * it->second;
}

double parse_frequency(const std::string& key, const std::string& value) {
    static const std::map<std::string, double> units = {
        {"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}};
    return parse_with_unit(key, value, units, true);
}

double parse_length(const std::string& key, const std::string& value) {
    static const std::map<std::string, double> units = {{"m", 1.0}, {"mm", 1e-3}, {"cm", 1e-2}};
    return parse_with_unit(key, value, units, true);
}

double parse_number(const std::string& key, const std::string& value) {
    return parse_with_unit(key, value, {}, false);
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::string item;
    std::istringstream ss(value);
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) {
            throw std::invalid_argument(key + ": empty list entry");
        }
        out.push_back(parse_number(key, item));
    }
    return out;
}

std::vector<std::size_t> parse_size_list(const std::string& key, const std::string& value) {
    std::vector<std::size_t> out;
    for (double d : parse_double_list(key, value)) {
        if (d < 1.0 || d != std::floor(d)) {
            throw std::invalid_argument(key + ": entries must be positive integers");
        }
        out.push_back(static_cast<std::size_t>(d));
    }
    return out;
}

std::size_t parse_size(const std::string& key, const std::string& value) {
    const double d = parse_number(key, value);
    if (d < 0.0 || d != std::floor(d)) {
        throw std::invalid_argument(key + ": expected a nonnegative integer");
    }
    return static_cast<std::size_t>(d);
}

std::string join_deg(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        out += format_double(v[i]);
    }
    return out;
}

std::string join_sizes(const std::vector<std::size_t>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        out += std::to_string(v[i]);
    }
    return out;
}

} // namespace

BiasLineGeometry ScenarioConfig::geometry() const {
    BiasLineGeometry g;
    g.element_count = element_count;
    g.left_extension = left_extension;
    g.right_extension = right_extension;
    g.element_spacing = element_spacing;
    g.fundamental_freq = fundamental_freq;
    g.mode_count = mode_count;
    return g;
}

ArrayScenario ScenarioConfig::scenario() const {
    ArrayScenario s;
    s.element_count = element_count;
    s.spacing_wavelengths = delta();
    s.symbol_power = symbol_power;
    s.noise_power = noise_power;
    for (double d : desired_deg) {
        s.desired_dirs.push_back(deg_to_rad(d));
    }
    for (double d : undesired_deg) {
        s.undesired_dirs.push_back(deg_to_rad(d));
    }
    return s;
}

SamplerKind ScenarioConfig::sampler_kind() const {
    if (sampler == "envelope") {
        return EnvelopeDetector{};
    }
    return SampleAndHold{sample_time()};
}

ModeSelection ScenarioConfig::selection() const {
    return sweep_selection == "strongest_n" ? ModeSelection::StrongestN : ModeSelection::FirstN;
}

void ScenarioConfig::validate() const {
    if (carrier_freq <= 0.0) {
        throw std::invalid_argument("f_c: must be > 0");
    }
    geometry().validate();
    scenario().validate();
    if (sampler != "sh" && sampler != "envelope") {
        throw std::invalid_argument("sampler: must be 'sh' or 'envelope'");
    }
    static const std::set<std::string> algorithms = {
        "ideal", "arbitrary", "envelope-wr-bf", "sh-ls", "sh-wls", "sa", "combined"};
    if (algorithms.find(algorithm) == algorithms.end()) {
        throw std::invalid_argument("algorithm: unknown value '" + algorithm + "'");
    }
    if (pattern_step_deg <= 0.0) {
        throw std::invalid_argument("pattern_step_deg: must be > 0");
    }
    if (threads < 1) {
        throw std::invalid_argument("threads: must be >= 1");
    }
    brute_force.validate();
    annealing.validate();
    null_steer.validate();
    if (sampler == "sh") {
        BiasLineGeometry g = geometry();
        check_sample_time(g, sample_time());
    }
    if (model_f_step <= 0.0 || model_f_stop < model_f_start || model_f_start <= 0.0) {
        throw std::invalid_argument("model_f_*: need 0 < start <= stop and step > 0");
    }
    if (sweep_selection != "first_n" && sweep_selection != "strongest_n") {
        throw std::invalid_argument("sweep_selection: must be 'first_n' or 'strongest_n'");
    }
    if (sweep_trials < 1) {
        throw std::invalid_argument("sweep_trials: must be >= 1");
    }
}

std::string ScenarioConfig::canonical() const {
    std::string s;
    s += "f_c = " + format_double(carrier_freq / 1e9) + " GHz\n";
    s += "d_x = " + format_double(element_spacing * 1e3) + " mm\n";
    s += "f_b = " + format_double(fundamental_freq / 1e6) + " MHz\n";
    s += "M = " + std::to_string(element_count) + "\n";
    s += "N = " + std::to_string(mode_count) + "\n";
    s += "M_l = " + std::to_string(left_extension) + "\n";
    s += "M_r = " + std::to_string(right_extension) + "\n";
    s += "sampler = " + sampler + "\n";
    s += "t0_rad = " + format_double(t0_rad) + "\n";
    s += "rho_s = " + format_double(symbol_power) + "\n";
    s += "sigma_s2 = " + format_double(noise_power) + "\n";
    s += "desired_deg = " + join_deg(desired_deg) + "\n";
    s += "undesired_deg = " + join_deg(undesired_deg) + "\n";
    s += "algorithm = " + algorithm + "\n";
    s += "seed = " + std::to_string(seed) + "\n";
    s += "pattern_step_deg = " + format_double(pattern_step_deg) + "\n";
    s += "bf_initial_step = " + format_double(brute_force.initial_step) + "\n";
    s += "bf_step_floor = " + format_double(brute_force.step_floor) + "\n";
    s += "sa_lambda = " + format_double(annealing.perturbation) + "\n";
    s += "sa_cooling = " + format_double(annealing.cooling) + "\n";
    s += "sa_iterations = " + std::to_string(annealing.max_iterations) + "\n";
    s += "sa_patience = " + std::to_string(annealing.revert_patience) + "\n";
    s += "null_threshold = " + format_double(null_steer.threshold) + "\n";
    s += "null_max_passes = " + std::to_string(null_steer.max_passes) + "\n";
    s += "model_f_start = " + format_double(model_f_start / 1e9) + " GHz\n";
    s += "model_f_stop = " + format_double(model_f_stop / 1e9) + " GHz\n";
    s += "model_f_step = " + format_double(model_f_step / 1e6) + " MHz\n";
    s += "sweep_m_list = " + join_sizes(sweep_m_list) + "\n";
    s += "sweep_n_list = " + join_sizes(sweep_n_list) + "\n";
    s += "sweep_trials = " + std::to_string(sweep_trials) + "\n";
    s += "sweep_selection = " + sweep_selection + "\n";
    return s;
}

ScenarioConfig parse_config_text(const std::string& text) {
    ScenarioConfig cfg;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!seen.insert(key).second) {
            throw std::invalid_argument("config: repeated key '" + key + "'");
        }

        if (key == "f_c") {
            cfg.carrier_freq = parse_frequency(key, value);
        } else if (key == "d_x") {
            cfg.element_spacing = parse_length(key, value);
        } else if (key == "f_b") {
            cfg.fundamental_freq = parse_frequency(key, value);
        } else if (key == "M") {
            cfg.element_count = parse_size(key, value);
        } else if (key == "N") {
            cfg.mode_count = parse_size(key, value);
        } else if (key == "M_l") {
            cfg.left_extension = parse_size(key, value);
        } else if (key == "M_r") {
            cfg.right_extension = parse_size(key, value);
        } else if (key == "sampler") {
            cfg.sampler = value;
        } else if (key == "t0_rad") {
            cfg.t0_rad = parse_number(key, value);
        } else if (key == "rho_s") {
            cfg.symbol_power = parse_number(key, value);
        } else if (key == "sigma_s2") {
            cfg.noise_power = parse_number(key, value);
        } else if (key == "desired_deg") {
            cfg.desired_deg = parse_double_list(key, value);
        } else if (key == "undesired_deg") {
            cfg.undesired_deg = value.empty() ? std::vector<double>{} : parse_double_list(key, value);
        } else if (key == "algorithm") {
            cfg.algorithm = value;
        } else if (key == "seed") {
            cfg.seed = static_cast<std::uint64_t>(parse_size(key, value));
        } else if (key == "out_dir") {
            cfg.out_dir = value;
        } else if (key == "pattern_step_deg") {
            cfg.pattern_step_deg = parse_number(key, value);
        } else if (key == "threads") {
            cfg.threads = parse_size(key, value);
        } else if (key == "varactor_file") {
            cfg.varactor_file = value;
        } else if (key == "bf_initial_step") {
            cfg.brute_force.initial_step = parse_number(key, value);
        } else if (key == "bf_step_floor") {
            cfg.brute_force.step_floor = parse_number(key, value);
        } else if (key == "sa_lambda") {
            cfg.annealing.perturbation = parse_number(key, value);
        } else if (key == "sa_cooling") {
            cfg.annealing.cooling = parse_number(key, value);
        } else if (key == "sa_iterations") {
            cfg.annealing.max_iterations = parse_size(key, value);
        } else if (key == "sa_patience") {
            cfg.annealing.revert_patience = parse_size(key, value);
        } else if (key == "null_threshold") {
            cfg.null_steer.threshold = parse_number(key, value);
        } else if (key == "null_max_passes") {
            cfg.null_steer.max_passes = parse_size(key, value);
        } else if (key == "model_f_start") {
            cfg.model_f_start = parse_frequency(key, value);
        } else if (key == "model_f_stop") {
            cfg.model_f_stop = parse_frequency(key, value);
        } else if (key == "model_f_step") {
            cfg.model_f_step = parse_frequency(key, value);
        } else if (key == "sweep_m_list") {
            cfg.sweep_m_list = parse_size_list(key, value);
        } else if (key == "sweep_n_list") {
            cfg.sweep_n_list = parse_size_list(key, value);
        } else if (key == "sweep_trials") {
            cfg.sweep_trials = parse_size(key, value);
        } else if (key == "sweep_selection") {
            cfg.sweep_selection = value;
        } else {
            throw std::invalid_argument("config: unknown key '" + key + "'");
        }
    }
    return cfg;
}

ScenarioConfig load_config(const std::string& path) {
    return parse_config_text(read_file(path));
}

} // namespace waveris
