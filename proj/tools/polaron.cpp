#include <cstdlib>

#include <CLI11.hpp>

#include "polaron/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"polaron: Landau-Pekar dynamics laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;

    std::vector<std::string> names = {"run", "sweep", "pekar", "fock", "check"};
    std::vector<std::string> descs = {
        "single trajectory with conservation tracking",
        "adiabatic scaling sweep over alpha",
        "self-consistent minimizer and stationarity trace",
        "truncated Fock-space comparison and operator checks",
        "randomized invariant battery",
    };
    for (std::size_t i = 0; i < names.size(); ++i) {
        auto* sub = app.add_subcommand(names[i], descs[i]);
        sub->add_option("--config", config_path, "JSON config path")->required();
        sub->add_option("--out", out_dir, "output directory (overrides config)");
        sub->add_option("--seed", seed, "RNG seed (overrides config)")
            ->each([&](const std::string&) { seed_set = true; });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        polaron::RunConfig cfg = polaron::parse_config(config_path);
        cfg.command = polaron::command_from_string(app.get_subcommands().front()->get_name());
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (seed_set) cfg.seed = seed;
        if (const char* env = std::getenv("POLARON_THREADS")) {
            long v = std::strtol(env, nullptr, 10);
            if (v > 0) cfg.threads = static_cast<unsigned>(v);
        }
        return static_cast<int>(polaron::execute(cfg));
    } catch (const polaron::ConfigError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return static_cast<int>(polaron::ExitCode::config_error);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return static_cast<int>(polaron::ExitCode::numerical_failure);
    }
}
