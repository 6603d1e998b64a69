#include "nfpc/adjoint.hpp"

#include <sstream>

#include "nfpc/error.hpp"

namespace nfpc {

AdjointTrajectory solve_adjoint(const ScalarField& Su, const CoefficientModel& model, const CostSpec& cost) {
    const GridSpec& g = Su.grid();
    if (!model.time_independent)
        throw ContractError("adjoint: the dual equation requires time-independent b and sigma");
    if (model.dim != g.dim) throw ContractError("adjoint: model dimension does not match grid");

    const CoefficientSample coef = sample_coefficients(model, Su, 0.0);
    AdjointTrajectory traj;
    traj.grid = g;
    traj.substeps = substeps_per_step(model, g);
    const double h = g.dt() / traj.substeps;
    const int n_cells = g.cells;
    const double inv2dx = 1.0 / (2.0 * g.dx());
    const double invdx2 = 1.0 / (g.dx() * g.dx());

    std::vector<ScalarField> states(static_cast<std::size_t>(g.steps) + 1);
    states.back() = sample_terminal(cost, g);
    ScalarField p = states.back();
    ScalarField next(g);

    for (int n = g.steps; n > 0; --n) {
        for (int m = 0; m < traj.substeps; ++m) {
            const double t = g.time(n) - m * h;
            const ScalarField G = sample_running(cost, g, t);
            for (std::size_t c = 0; c < p.size(); ++c) {
                const auto [ix, iy] = g.unflatten(c);
                const std::size_t xp = g.flatten(ix + 1 == n_cells ? 0 : ix + 1, iy);
                const std::size_t xm = g.flatten(ix == 0 ? n_cells - 1 : ix - 1, iy);
                double adv = coef.drift.component(0)[c] * (p[xp] - p[xm]) * inv2dx;
                double lap = p[xp] - 2.0 * p[c] + p[xm];
                if (g.dim == 2) {
                    const std::size_t yp = g.flatten(ix, iy + 1 == n_cells ? 0 : iy + 1);
                    const std::size_t ym = g.flatten(ix, iy == 0 ? n_cells - 1 : iy - 1);
                    adv += coef.drift.component(1)[c] * (p[yp] - p[ym]) * inv2dx;
                    lap += p[yp] - 2.0 * p[c] + p[ym];
                }
                next[c] = p[c] + h * (adv + 0.5 * coef.q[c] * lap * invdx2 + G[c]);
            }
            std::swap(p, next);
            if (!p.all_finite()) {
                std::ostringstream msg;
                msg << "adjoint: non-finite value at step " << n << " sub-step " << m << " (t=" << t - h << ")";
                throw SolverError(msg.str());
            }
        }
        states[static_cast<std::size_t>(n) - 1] = p;
    }
    traj.states = std::move(states);
    return traj;
}

AdjointTrajectory solve_adjoint(const ControlField& u, const NonlocalOperator& op,
                                const CoefficientModel& model, const CostSpec& cost) {
    return solve_adjoint(op.apply(u), model, cost);
}

}  // namespace nfpc
