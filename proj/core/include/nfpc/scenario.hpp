#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nfpc/montecarlo.hpp"
#include "nfpc/optimizer.hpp"

namespace nfpc {

/// Parameters of the wealth-process preset.
struct FinanceParams {
    double r = 0.05;          ///< base drift
    double mu1 = 0.5;         ///< extra drift at saturation
    double sigma0 = 0.2;      ///< base volatility (> 0)
    double sigma1 = 0.3;      ///< extra volatility at saturation
    double x_target = 0.5;
    double lambda_run = 1.0;  ///< running tracking weight
    double alpha = 1.0;       ///< quadratic penalty weight
};

/**
 * d = 1 wealth model with saturating response to s = Su:
 *   b = r + mu1 s/(1+s),  sigma = sigma0 + sigma1 s/(1+s),
 *   G = lambda_run (x - x_target)^2,  G_T = (x - x_target)^2,  h = alpha/2 w^2.
 * gamma = sigma0^2. Throws ContractError for sigma0 <= 0 or other invalid params.
 */
std::pair<CoefficientModel, CostSpec> finance_preset(const FinanceParams& params);

/// Thresholds used by `mc-compare` to flag a breach.
struct McAcceptance {
    double l1_tolerance = 0.05;
    double cost_allowance = 0.02;  ///< relative to the PDE cost
    double se_multiplier = 3.0;
};

struct GradCheckConfig {
    std::vector<double> eps{1e-2, 1e-3, 1e-4};
    std::uint64_t seed = 7;
    /// Direction entries are uniform in [-amplitude, amplitude] * M0.
    double amplitude = 0.25;
};

/// A fully validated problem instance plus run settings.
struct Scenario {
    std::string name;
    ControlProblem problem;
    ControlField initial_control;
    SweepConfig sweep;
    McConfig monte_carlo;
    bool monte_carlo_configured = false;
    McAcceptance mc_acceptance;
    GradCheckConfig grad_check;
    std::vector<double> output_checkpoints;
    std::vector<std::string> warnings;
    /// Resolved configuration (all defaults filled in); itself loadable.
    std::string resolved_config;
};

/// Parses and validates a JSON configuration. Unknown keys are rejected.
/// Throws ConfigError (parse errors and violated hypotheses alike).
Scenario parse_config(const std::string& json_text);
Scenario load_config(const std::string& path);
/// Resolved configuration as pretty-printed JSON.
std::string emit_config(const Scenario& scenario);

}  // namespace nfpc
