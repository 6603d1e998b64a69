// Command-line driver: nloc-fp-control <subcommand> --config <file> --out <dir>
#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "nfpc/error.hpp"
#include "nfpc/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Nonlocal Fokker-Planck optimal control solver"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::vector<CLI::App*> subs;
    for (const char* name : {"solve", "mc-compare", "grad-check", "forward-only"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON scenario file")->required();
        sub->add_option("--out", out_dir, "output directory")->required();
        sub->add_option("--seed", seed, "Monte-Carlo / direction seed");
        sub->add_option("--threads", threads, "Monte-Carlo worker threads")->check(CLI::PositiveNumber);
        subs.push_back(sub);
    }
    app.description(
        "Subcommands:\n"
        "  solve         forward-backward sweep for the optimal control\n"
        "  mc-compare    solve, then cross-check against Euler-Maruyama paths\n"
        "  grad-check    finite-difference check of the gradient at the initial control\n"
        "  forward-only  density for the configured initial control\n"
        "Exit codes: 0 ok, 2 config error, 3 solver failure, 4 mc-compare tolerance breach");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : nfpc::exit_config_error;
    }

    CLI::App* chosen = app.get_subcommands().front();
    const auto cmd = nfpc::parse_subcommand(chosen->get_name());
    nfpc::RunOptions options;
    options.out_dir = out_dir;
    if (chosen->count("--seed")) options.seed = seed;
    if (chosen->count("--threads")) options.threads = threads;

    nfpc::Scenario scenario;
    try {
        scenario = nfpc::load_config(config_path);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        nfpc::write_error_report(options.out_dir, "config", e.what());
        return nfpc::exit_config_error;
    }
    for (const auto& w : scenario.warnings) std::cerr << "warning: " << w << "\n";

    try {
        const int status = nfpc::run(*cmd, scenario, options);
        if (status == nfpc::exit_acceptance_breach)
            std::cerr << "mc-compare: acceptance tolerance breached (see report.json)\n";
        return status;
    } catch (const nfpc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        nfpc::write_error_report(options.out_dir, "config", e.what());
        return nfpc::exit_config_error;
    } catch (const nfpc::ContractError& e) {
        std::cerr << "contract violation: " << e.what() << "\n";
        nfpc::write_error_report(options.out_dir, "contract", e.what());
        return nfpc::exit_config_error;
    } catch (const std::exception& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        nfpc::write_error_report(options.out_dir, "solver", e.what());
        return nfpc::exit_solver_failure;
    }
}
