#include "nfpc/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nfpc/error.hpp"

namespace nfpc {

void ControlProblem::validate() const {
    grid.validate();
    if (!op) throw ContractError("problem: missing nonlocal operator");
    if (!omega) throw ContractError("problem: missing control region");
    if (!(op->grid() == grid) || !(omega->grid() == grid)) throw ContractError("problem: grid mismatch");
    if (!(bound > 0.0) || !std::isfinite(bound))
        throw ContractError("admissible set: control bound M0 must be positive");
    validate_model(model, grid, s_max());
    validate_cost(cost, grid, bound);
    if (!(rho0.grid() == grid)) throw ContractError("H3: initial density grid mismatch");
    if (rho0.min() < 0.0) throw ContractError("H3: initial density must be nonnegative");
    if (std::abs(integrate(rho0) - 1.0) > 1e-9) throw ContractError("H3: initial density must integrate to 1");
}

CostBreakdown evaluate_cost(const ControlProblem& problem, const ControlField& u, const DensityTrajectory& rho) {
    const GridSpec& g = problem.grid;
    CostBreakdown c;
    const int steps = static_cast<int>(rho.states.size()) - 1;
    for (int n = 0; n <= steps; ++n) {
        const double w = (n == 0 || n == steps) ? 0.5 : 1.0;
        c.running += w * inner(sample_running(problem.cost, g, g.time(n)), rho.at(n));
    }
    c.running *= g.dt();
    c.terminal = inner(sample_terminal(problem.cost, g), rho.final_state());
    double pen = 0.0;
    for (double v : u.values()) pen += problem.cost.penalty(v);
    c.penalty = pen * g.cell_volume();
    c.total = c.running + c.terminal + c.penalty;
    return c;
}

StateEvaluation evaluate_state(const ControlProblem& problem, const ControlField& u) {
    StateEvaluation e;
    e.Su = problem.op->apply(u);
    e.rho = solve_forward(e.Su, problem.model, problem.rho0);
    e.cost = evaluate_cost(problem, u, e.rho);
    return e;
}

OmegaField switching_function(const ControlProblem& problem, const ScalarField& Su, const DensityTrajectory& rho,
                              const AdjointTrajectory& p) {
    if (!problem.model.time_independent)
        throw ContractError("switching function: requires time-independent b and sigma");
    const GridSpec& g = problem.grid;
    const int steps = static_cast<int>(rho.states.size()) - 1;
    if (static_cast<int>(p.states.size()) - 1 != steps) throw ContractError("switching function: trajectory length mismatch");

    std::array<ScalarField, 2> flow{ScalarField(g), ScalarField(g)};  // int rho dp/dx_k dt
    ScalarField curvature(g);                                       // int rho Delta p dt
    for (int n = 0; n <= steps; ++n) {
        const double w = ((n == 0 || n == steps) ? 0.5 : 1.0) * g.dt();
        const VectorField grad = gradient(p.at(n));
        const ScalarField lap = laplacian(p.at(n));
        const ScalarField& r = rho.at(n);
        for (std::size_t c = 0; c < r.size(); ++c) {
            for (int k = 0; k < g.dim; ++k) flow[k][c] += w * r[c] * grad.component(k)[c];
            curvature[c] += w * r[c] * lap[c];
        }
    }

    const SensitivitySample sens = sample_sensitivities(problem.model, Su, 0.0);
    ScalarField integrand(g);
    for (std::size_t c = 0; c < integrand.size(); ++c) {
        double a = 0.0;
        for (int k = 0; k < g.dim; ++k) a += sens.drift_ds.component(k)[c] * flow[k][c];
        integrand[c] = a + 0.5 * sens.q_ds[c] * curvature[c];
    }
    return problem.op->apply_adjoint(integrand, problem.omega);
}

double argmin_scalar(const Penalty& h, double phi, double bound, double resolution) {
    if (h.pure_quadratic) return std::clamp(-phi / h.alpha, 0.0, bound) + 0.0;
    auto f = [&](double w) { return h(w) + w * phi; };
    double lo = 0.0, hi = bound;
    while (hi - lo > resolution) {
        const double m1 = lo + (hi - lo) / 3.0;
        const double m2 = hi - (hi - lo) / 3.0;
        if (f(m1) <= f(m2)) hi = m2;
        else lo = m1;
    }
    double best = lo;
    double best_val = f(lo);
    for (double w : {0.5 * (lo + hi), hi}) {
        const double v = f(w);
        if (v < best_val) {
            best = w;
            best_val = v;
        }
    }
    return best;
}

ControlField pointwise_argmin(const OmegaField& phi, const Penalty& h, double bound, double resolution) {
    std::vector<double> w(phi.values.size());
    for (std::size_t j = 0; j < w.size(); ++j) {
        if (!std::isfinite(phi.values[j])) throw ModelError("pointwise argmin: switching function is not finite");
        w[j] = argmin_scalar(h, phi.values[j], bound, resolution);
    }
    return ControlField(phi.omega, bound, std::move(w));
}

// ---------------------------------------------------------------------------

void SweepConfig::validate() const {
    if (!(relaxation > 0.0 && relaxation <= 1.0)) throw ContractError("sweep: relaxation must lie in (0, 1]");
    if (max_iter < 1) throw ContractError("sweep: max_iter must be positive");
    if (!(tol_control > 0.0) || !(tol_residual > 0.0)) throw ContractError("sweep: tolerances must be positive");
    if (max_halvings < 0) throw ContractError("sweep: max_halvings must be >= 0");
}

std::string to_string(Termination t) {
    switch (t) {
        case Termination::residual: return "residual";
        case Termination::control_change: return "control_change";
        case Termination::max_iter: return "max_iter";
    }
    return "unknown";
}

namespace {

ControlField relax(const ControlField& u, const ControlField& target, double lambda) {
    std::vector<double> v(u.size());
    for (std::size_t j = 0; j < v.size(); ++j)
        v[j] = std::clamp((1.0 - lambda) * u[j] + lambda * target[j], 0.0, u.bound());
    return ControlField(u.omega(), u.bound(), std::move(v));
}

template <class F>
auto with_iteration(int k, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const SolverError& e) {
        throw SolverError("sweep iteration " + std::to_string(k) + ": " + e.what());
    } catch (const ModelError& e) {
        throw ModelError("sweep iteration " + std::to_string(k) + ": " + e.what());
    }
}

}  // namespace

SweepReport fb_sweep(const ControlProblem& problem, const SweepConfig& config, const ControlField& u0) {
    config.validate();
    if (!problem.model.time_independent)
        throw ContractError("sweep: the maximum-principle update requires a time-independent model");
    if (u0.omega() != problem.omega && !(u0.omega() && u0.omega()->cells() == problem.omega->cells()))
        throw ContractError("sweep: initial control lives on a different omega");
    const double resolution = config.argmin_resolution > 0.0 ? config.argmin_resolution : 1e-4 * problem.bound;

    SweepReport report;
    report.initial = u0;
    ControlField u = u0;
    StateEvaluation state = with_iteration(0, [&] { return evaluate_state(problem, u); });
    double last_step = 0.0;

    for (int k = 0;; ++k) {
        AdjointTrajectory p = with_iteration(k, [&] { return solve_adjoint(state.Su, problem.model, problem.cost); });
        OmegaField phi = with_iteration(k, [&] { return switching_function(problem, state.Su, state.rho, p); });
        const ControlField target = pointwise_argmin(phi, problem.cost.penalty, problem.bound, resolution);
        const double residual = omega_l2_distance(u.as_omega_field(), target.as_omega_field());

        SweepIteration row;
        row.index = k;
        row.cost = state.cost;
        row.residual = residual;

        bool stop = true;
        if (residual <= config.tol_residual) report.reason = Termination::residual;
        else if (k > 0 && last_step <= config.tol_control) report.reason = Termination::control_change;
        else if (k >= config.max_iter) report.reason = Termination::max_iter;
        else stop = false;

        if (stop) {
            report.history.push_back(row);
            report.control = u;
            report.cost = state.cost;
            report.residual = residual;
            report.Su = std::move(state.Su);
            report.density = std::move(state.rho);
            report.adjoint = std::move(p);
            report.switching = std::move(phi);
            return report;
        }

        double lambda = config.relaxation;
        ControlField candidate = relax(u, target, lambda);
        StateEvaluation trial = with_iteration(k, [&] { return evaluate_state(problem, candidate); });
        const double allowance = 1e-12 * std::max(1.0, std::abs(state.cost.total));
        while (trial.cost.total > state.cost.total + allowance && row.halvings < config.max_halvings) {
            lambda *= 0.5;
            ++row.halvings;
            candidate = relax(u, target, lambda);
            trial = with_iteration(k, [&] { return evaluate_state(problem, candidate); });
        }
        if (trial.cost.total > state.cost.total + allowance) {
            row.cost_increase = true;
            ++report.monotonicity_violations;
        }
        row.relaxation = lambda;
        row.step_norm = omega_l2_distance(u.as_omega_field(), candidate.as_omega_field());
        report.total_halvings += row.halvings;
        report.history.push_back(row);

        last_step = row.step_norm;
        u = std::move(candidate);
        state = std::move(trial);
        ++report.iterations;
    }
}

// ---------------------------------------------------------------------------

DirectionalCheckReport directional_derivative_check(const ControlProblem& problem, const ControlField& u,
                                                    const OmegaField& direction, const std::vector<double>& eps) {
    const Penalty& h = problem.cost.penalty;
    if (!h.differentiable()) throw ContractError("gradient check: penalty has no derivative");
    if (direction.values.size() != u.size()) throw ContractError("gradient check: direction size mismatch");

    std::vector<ControlField> perturbed;
    for (double e : eps) {
        std::vector<double> v(u.size());
        for (std::size_t j = 0; j < v.size(); ++j) v[j] = u[j] + e * direction.values[j];
        try {
            perturbed.emplace_back(u.omega(), u.bound(), std::move(v));
        } catch (const ContractError&) {
            throw ContractError("gradient check: u + eps v is not admissible for eps=" + std::to_string(e));
        }
    }

    const StateEvaluation base = evaluate_state(problem, u);
    const AdjointTrajectory p = solve_adjoint(base.Su, problem.model, problem.cost);
    OmegaField g = switching_function(problem, base.Su, base.rho, p);
    for (std::size_t j = 0; j < g.values.size(); ++j) g.values[j] += h.derivative(u[j]);

    DirectionalCheckReport report;
    report.predicted = omega_inner(g, direction);
    for (std::size_t i = 0; i < eps.size(); ++i) {
        const double j1 = evaluate_state(problem, perturbed[i]).cost.total;
        DirectionalCheckRow row;
        row.eps = eps[i];
        row.finite_difference = (j1 - base.cost.total) / eps[i];
        row.predicted = report.predicted;
        const double scale = std::abs(report.predicted);
        row.relative_mismatch = scale > 0.0 ? std::abs(row.finite_difference - report.predicted) / scale
                                            : std::abs(row.finite_difference);
        report.rows.push_back(row);
    }
    for (std::size_t i = 0; i + 1 < report.rows.size(); ++i) {
        const auto& a = report.rows[i];
        const auto& b = report.rows[i + 1];
        report.observed_order.push_back(std::log(a.relative_mismatch / b.relative_mismatch) / std::log(a.eps / b.eps));
    }
    return report;
}

}  // namespace nfpc
