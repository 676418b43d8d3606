#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "waveris/beamform.hpp"
#include "waveris/biasline.hpp"
#include "waveris/optimize.hpp"

namespace waveris {

// One flat configuration drives every subcommand. Parsing is strict: unknown
// or repeated keys are rejected so a typo cannot silently change a run.
// Frequencies and lengths take unit suffixes (GHz, MHz, kHz, Hz, m, mm, cm);
// angles are degrees in the file and radians internally.
struct ScenarioConfig {
    double carrier_freq = 3e9;        // f_c
    double element_spacing = 0.019;   // d_x, meters
    double fundamental_freq = 12.9e6; // f_b
    std::size_t element_count = 100;  // M
    std::size_t mode_count = 50;      // N
    std::size_t left_extension = 2;   // M_l
    std::size_t right_extension = 2;  // M_r
    std::string sampler = "sh";       // "sh" | "envelope"
    double t0_rad = 8.0;              // omega_b * t_0
    double symbol_power = 1.0;        // rho_s
    double noise_power = 1.0;         // sigma_s^2
    std::vector<double> desired_deg{-30.0};
    std::vector<double> undesired_deg{};
    std::string algorithm = "sh-wls";
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    double pattern_step_deg = 0.25;
    std::size_t threads = 1;
    std::string varactor_file; // empty: built-in table

    BruteForceConfig brute_force;
    SAConfig annealing; // seed is taken from `seed` at run time
    NullSteerConfig null_steer;

    double model_f_start = 2.6e9;
    double model_f_stop = 3.1e9;
    double model_f_step = 2e6;

    std::vector<std::size_t> sweep_m_list{100};
    std::vector<std::size_t> sweep_n_list{50};
    std::size_t sweep_trials = 10;
    std::string sweep_selection = "first_n"; // "first_n" | "strongest_n"

    // derived quantities
    double delta() const { return element_spacing * carrier_freq / kSpeedOfLight; }
    double omega_b() const { return kTwoPi * fundamental_freq; }
    double sample_time() const { return t0_rad / omega_b(); }

    BiasLineGeometry geometry() const;
    ArrayScenario scenario() const;
    SamplerKind sampler_kind() const;
    ModeSelection selection() const;

    void validate() const; // throws std::invalid_argument with the offending key

    // canonical text form; reports embed it so a run is reproducible from its output
    std::string canonical() const;
};

ScenarioConfig parse_config_text(const std::string& text);
ScenarioConfig load_config(const std::string& path);

} // namespace waveris
