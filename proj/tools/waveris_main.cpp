#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "waveris/cli.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir;
    std::size_t threads = 0;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* out_opt = nullptr;
    CLI::Option* threads_opt = nullptr;
};

void add_common(CLI::App* sub, CommonFlags& flags) {
    sub->add_option("--config", flags.config_path, "scenario configuration file");
    flags.seed_opt = sub->add_option("--seed", flags.seed, "override the configured seed");
    flags.out_opt = sub->add_option("--out", flags.out_dir, "output directory");
    flags.threads_opt = sub->add_option("--threads", flags.threads, "worker threads for sweeps");
}

waveris::ScenarioConfig resolve(const CommonFlags& flags) {
    waveris::ScenarioConfig cfg;
    if (!flags.config_path.empty()) {
        cfg = waveris::load_config(flags.config_path);
    }
    if (flags.seed_opt->count() > 0) {
        cfg.seed = flags.seed;
    }
    if (flags.out_opt->count() > 0) {
        cfg.out_dir = flags.out_dir;
    }
    if (flags.threads_opt->count() > 0) {
        cfg.threads = flags.threads;
    }
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"wave-controlled RIS beamforming simulator"};
    app.require_subcommand(1);

    CommonFlags model_flags, optimize_flags, sweep_flags;
    CLI::App* model = app.add_subcommand("model", "reflection magnitude/phase sweep");
    add_common(model, model_flags);
    CLI::App* optimize = app.add_subcommand("optimize", "run one configuration search");
    add_common(optimize, optimize_flags);
    CLI::App* sweep = app.add_subcommand("sweep", "mean SLNR over element/mode counts");
    add_common(sweep, sweep_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (model->parsed()) {
            return waveris::cmd_model(resolve(model_flags), std::cout);
        }
        if (optimize->parsed()) {
            return waveris::cmd_optimize(resolve(optimize_flags), std::cout);
        }
        return waveris::cmd_sweep(resolve(sweep_flags), std::cout);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 2;
    }
}
