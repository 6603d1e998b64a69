#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "nfpc/scenario.hpp"

namespace nfpc {

enum class Subcommand { solve, mc_compare, grad_check, forward_only };

std::optional<Subcommand> parse_subcommand(const std::string& name);
std::string to_string(Subcommand cmd);

struct RunOptions {
    std::filesystem::path out_dir;
    /// Overrides the Monte-Carlo and gradient-check seeds.
    std::optional<std::uint64_t> seed;
    /// Overrides the Monte-Carlo thread count.
    std::optional<unsigned> threads;
};

/// Exit status of a completed run.
inline constexpr int exit_ok = 0;
inline constexpr int exit_config_error = 2;
inline constexpr int exit_solver_failure = 3;
inline constexpr int exit_acceptance_breach = 4;

/**
 * Runs one subcommand and writes report.json plus the CSV artifacts into
 * options.out_dir (created if missing). Returns exit_ok, or
 * exit_acceptance_breach when mc-compare misses its tolerances (the report is
 * still written). Errors propagate as exceptions.
 */
int run(Subcommand cmd, const Scenario& scenario, const RunOptions& options);

/// Writes a report.json describing a failed run; never throws.
void write_error_report(const std::filesystem::path& out_dir, const std::string& kind, const std::string& message);

}  // namespace nfpc
