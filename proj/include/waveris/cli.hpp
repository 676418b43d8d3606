#pragma once

#include <iosfwd>
#include <string>

#include "waveris/config.hpp"

namespace waveris {

// Subcommand drivers. Each validates the config, writes its outputs under
// cfg.out_dir and returns a process exit code: 0 success, 1 validation
// error, 2 runtime or convergence failure. Progress goes to `log`; all file
// output is a deterministic function of (config, seed).
int cmd_model(const ScenarioConfig& cfg, std::ostream& log);
int cmd_optimize(const ScenarioConfig& cfg, std::ostream& log);
int cmd_sweep(const ScenarioConfig& cfg, std::ostream& log);

// Weights file: one "W<k> = <volts>" line per coefficient, k = 0..N.
void save_weights(const ModeWeights& weights, const std::string& path);
ModeWeights load_weights(const std::string& path);

// Sweep table: "M, N, selection, mean_slnr_dB, std_dB, trials".
std::string sweep_to_string(const std::vector<SweepRow>& rows);
std::vector<SweepRow> parse_sweep_csv(const std::string& text);

} // namespace waveris
