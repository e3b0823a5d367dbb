// Command-line front end: mirrorqed <task> --config cfg.json [--out DIR]
// [--threads N] [--dt X] [--seed S]. Exit codes: 0 success, 2 config/schema
// error, 3 numerical-regime error, 4 I/O error.

#include "mirrorqed/errors.hpp"
#include "mirrorqed/runconfig.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Waveguide-QED simulator: dark-state gates, shaped photon "
                 "emission and entangled-state protocols for three emitters "
                 "in front of a mirror"};

    std::string task, config_path, out_dir;
    int threads = 0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    bool seed_set = false;

    std::string task_list;
    for (const auto& t : mirrorqed::known_tasks()) task_list += t + " ";
    app.add_option("task", task, "one of: " + task_list)->required();
    app.add_option("--config", config_path, "JSON run configuration")->required();
    app.add_option("--out", out_dir, "output directory (default: $MIRRORQED_OUT or ./out)");
    app.add_option("--threads", threads, "worker threads for sweeps");
    app.add_option("--dt", dt, "integrator step override, units 1/gamma0");
    auto* seed_opt = app.add_option("--seed", seed, "RNG seed for disorder sweeps");

    CLI11_PARSE(app, argc, argv);
    seed_set = seed_opt->count() > 0;

    nlohmann::json config;
    {
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "error: cannot open config file " << config_path << '\n';
            return 4;
        }
        try {
            in >> config;
        } catch (const nlohmann::json::parse_error& e) {
            std::cerr << "error: config is not valid JSON: " << e.what() << '\n';
            return 2;
        }
    }

    mirrorqed::CliOverrides overrides;
    overrides.out = out_dir;
    overrides.threads = threads;
    overrides.dt = dt;
    overrides.seed = seed;
    overrides.seed_set = seed_set;

    try {
        const auto artifacts = mirrorqed::run_task(task, config, overrides);
        for (const auto& a : artifacts) std::cout << a << '\n';
        return 0;
    } catch (const mirrorqed::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const mirrorqed::RegimeError& e) {
        std::cerr << "numerical-regime error: " << e.what() << '\n';
        return 3;
    } catch (const mirrorqed::IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
