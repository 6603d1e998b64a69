#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nfpc/cost.hpp"
#include "nfpc/forward.hpp"
#include "nfpc/nonlocal.hpp"

namespace nfpc {

struct McConfig {
    std::size_t paths = 100000;
    std::uint64_t seed = 1;
    double dt = 1e-3;
    /// Times at which positions are recorded; snapped to the MC time lattice.
    std::vector<double> checkpoints;
    /// Histogram cells per axis (must divide the grid's); 0 means the grid's own.
    int bins = 0;
    unsigned threads = 1;

    void validate(const GridSpec& grid) const;
};

struct EmpiricalDensity {
    ScalarField density;
    std::size_t samples = 0;
    /// Fraction of samples that fell inside the box.
    double retained_fraction = 0.0;
};

struct McResult {
    int dim = 1;
    std::size_t paths = 0;
    double dt = 0.0;                   ///< effective step, T / steps
    int steps = 0;
    std::vector<double> times;         ///< snapped checkpoint times
    /// positions[c][i * dim + k]: coordinate k of path i at checkpoint c.
    std::vector<std::vector<double>> positions;
    std::size_t wrap_events = 0;       ///< steps at which a path crossed the box edge
    double wrapped_path_fraction = 0.0;
    std::vector<std::string> warnings;

    std::span<const double> samples(std::size_t checkpoint) const { return positions.at(checkpoint); }
};

/// Linear (bilinear in 2-d) periodic interpolation of a cell-centred field.
double interpolate(const ScalarField& f, const Point& x);

/**
 * Euler-Maruyama paths X_{n+1} = X_n + b dt + sigma sqrt(dt) xi with
 * s = interpolated Su, periodic wrap into the box. X_0 is drawn from rho0 by
 * inverse CDF (1-d) or rejection (2-d). Path i draws from PhiloxStream(seed, i)
 * so results do not depend on the thread count. Throws SolverError naming the
 * path and step on a non-finite position.
 */
McResult simulate_paths(const ScalarField& Su, const CoefficientModel& model, const ScalarField& rho0,
                        const McConfig& config);
McResult simulate_paths(const ControlField& u, const NonlocalOperator& op, const CoefficientModel& model,
                        const ScalarField& rho0, const McConfig& config);

/// Same box and horizon as `grid` with `bins` cells per axis (0 keeps the grid).
GridSpec histogram_grid(const GridSpec& grid, int bins);
/// Block average onto a coarser grid whose cell count divides the field's.
ScalarField coarsen(const ScalarField& f, const GridSpec& coarse);

/// Histogram normalised by (sample count * dx^d); out-of-box samples dropped.
EmpiricalDensity empirical_density(std::span<const double> samples, const GridSpec& grid);

struct McCostEstimate {
    double running = 0.0;
    double terminal = 0.0;
    double total = 0.0;  ///< running + terminal (the penalty is deterministic)
    double se_running = 0.0;
    double se_terminal = 0.0;
    double se_total = 0.0;
};

/// Per-path trapezoid of G over the checkpoints plus G_T at the last one.
/// Requires checkpoints spanning [0, T].
McCostEstimate estimate_cost_mc(const McResult& result, const CostSpec& cost, double horizon);

struct DensityComparison {
    double l1 = 0.0;
    double max_cell = 0.0;
};

/// Throws ContractError when the two fields live on different grids.
DensityComparison compare_mc_pde(const ScalarField& empirical, const ScalarField& pde);

}  // namespace nfpc
