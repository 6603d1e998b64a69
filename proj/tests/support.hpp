#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "nfpc/montecarlo.hpp"
#include "nfpc/optimizer.hpp"
#include "nfpc/philox.hpp"
#include "nfpc/scenario.hpp"

namespace nfpc::testing {

inline GridSpec grid1d(double L, int cells, double T = 1.0, int steps = 100) {
    GridSpec g;
    g.dim = 1;
    g.half_width = L;
    g.cells = cells;
    g.horizon = T;
    g.steps = steps;
    return g;
}

inline GridSpec grid2d(double L, int cells, double T = 1.0, int steps = 20) {
    GridSpec g = grid1d(L, cells, T, steps);
    g.dim = 2;
    return g;
}

inline OmegaPtr box_omega(const GridSpec& g, double a) {
    return std::make_shared<const OmegaMask>(OmegaMask::box(g, {-a, -a}, {a, a}));
}

inline ControlField random_control(OmegaPtr omega, double bound, std::uint64_t seed) {
    PhiloxStream rng(seed, 0);
    std::vector<double> v(omega->count());
    for (auto& x : v) x = bound * rng.uniform();
    return ControlField(omega, bound, std::move(v));
}

inline ScalarField random_field(const GridSpec& g, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    PhiloxStream rng(seed, 1);
    ScalarField f(g);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = lo + (hi - lo) * rng.uniform();
    return f;
}

inline ScalarField gaussian_density(const GridSpec& g, double mean, double var) {
    InitialDensityParams p;
    p.components = {GaussianComponent{1.0, {mean, mean}, var}};
    return make_initial_density(g, p);
}

/// Finance control problem on the desk grid (L = 4, Nx = 256, Nt = 100).
inline ControlProblem finance_problem(const FinanceParams& params = {}, int cells = 256, int steps = 100,
                                      double bound = 2.0) {
    ControlProblem pr;
    pr.grid = grid1d(4.0, cells, 1.0, steps);
    pr.omega = box_omega(pr.grid, 1.0);
    KernelParams kp;
    kp.width = 0.2;
    pr.op = std::make_shared<const ConvolutionOperator>(build_kernel(pr.grid, kp));
    pr.bound = bound;
    auto [model, cost] = finance_preset(params);
    pr.model = std::move(model);
    pr.cost = std::move(cost);
    pr.rho0 = gaussian_density(pr.grid, 0.0, 0.04);
    pr.validate();
    return pr;
}

inline FinanceParams desk_finance() {
    FinanceParams p;
    p.alpha = 0.1;
    return p;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace nfpc::testing
