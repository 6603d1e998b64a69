#include "nfpc/cost.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "nfpc/error.hpp"

namespace nfpc {

namespace {

void require_alpha(double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ContractError("H4: penalty coercivity alpha must be positive");
}

void require_nonnegative(double c, const char* what) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw ContractError(std::string("H4: penalty parameter ") + what + " must be >= 0");
}

}  // namespace

Penalty quadratic_penalty(double alpha) {
    require_alpha(alpha);
    Penalty p;
    p.name = "quadratic";
    p.alpha = alpha;
    p.value = [alpha](double w) { return 0.5 * alpha * w * w; };
    p.derivative = [alpha](double w) { return alpha * w; };
    p.pure_quadratic = true;
    return p;
}

Penalty quadratic_linear_penalty(double alpha, double beta) {
    require_alpha(alpha);
    require_nonnegative(beta, "beta");
    Penalty p;
    p.name = "quadratic_linear";
    p.alpha = alpha;
    p.value = [alpha, beta](double w) { return 0.5 * alpha * w * w + beta * w; };
    p.derivative = [alpha, beta](double w) { return alpha * w + beta; };
    return p;
}

Penalty quadratic_quartic_penalty(double alpha, double c) {
    require_alpha(alpha);
    require_nonnegative(c, "c");
    Penalty p;
    p.name = "quadratic_quartic";
    p.alpha = alpha;
    p.value = [alpha, c](double w) { return 0.5 * alpha * w * w + c * w * w * w * w; };
    p.derivative = [alpha, c](double w) { return alpha * w + 4.0 * c * w * w * w; };
    return p;
}

Penalty quadratic_hinge_penalty(double alpha, double c, double knee) {
    require_alpha(alpha);
    require_nonnegative(c, "c");
    Penalty p;
    p.name = "quadratic_hinge";
    p.alpha = alpha;
    p.value = [alpha, c, knee](double w) { return 0.5 * alpha * w * w + c * std::max(0.0, w - knee); };
    return p;
}

Penalty quadratic_exp_penalty(double alpha, double c) {
    require_alpha(alpha);
    require_nonnegative(c, "c");
    Penalty p;
    p.name = "quadratic_exp";
    p.alpha = alpha;
    p.value = [alpha, c](double w) { return 0.5 * alpha * w * w + c * (std::expm1(w) - w); };
    p.derivative = [alpha, c](double w) { return alpha * w + c * std::expm1(w); };
    return p;
}

CostSpec constant_cost(double running, double terminal, double alpha) {
    CostSpec c;
    c.name = "constant";
    c.running = [running](double, const Point&) { return running; };
    c.terminal = [terminal](const Point&) { return terminal; };
    c.penalty = quadratic_penalty(alpha);
    return c;
}

ScalarField sample_running(const CostSpec& cost, const GridSpec& grid, double t) {
    ScalarField g = tabulate(grid, [&](const Point& x) { return cost.running(t, x); });
    if (!g.all_finite()) throw ModelError("cost '" + cost.name + "': running cost is not finite");
    return g;
}

ScalarField sample_terminal(const CostSpec& cost, const GridSpec& grid) {
    ScalarField g = tabulate(grid, [&](const Point& x) { return cost.terminal(x); });
    if (!g.all_finite()) throw ModelError("cost '" + cost.name + "': terminal cost is not finite");
    return g;
}

void validate_cost(const CostSpec& cost, const GridSpec& grid, double bound) {
    if (!cost.running || !cost.terminal || !cost.penalty.value)
        throw ContractError("cost: missing evaluator");
    require_alpha(cost.penalty.alpha);

    for (int n = 0; n <= grid.steps; ++n) {
        const ScalarField g = sample_running(cost, grid, grid.time(n));
        if (g.min() < 0.0) throw ContractError("H4: running cost G < 0 at t=" + std::to_string(grid.time(n)));
    }
    if (sample_terminal(cost, grid).min() < 0.0) throw ContractError("H4: terminal cost G_T < 0");

    const Penalty& h = cost.penalty;
    if (!(h(0.0) >= 0.0)) throw ContractError("H4: penalty h(0) must be >= 0");
    constexpr int n = 41;
    for (int i = 0; i < n; ++i) {
        const double a = bound * i / (n - 1);
        const double ha = h(a);
        if (!std::isfinite(ha)) throw ContractError("H4: penalty not finite on [0, M0]");
        if (ha < 0.5 * h.alpha * a * a * (1.0 - 1e-12) - 1e-300)
            throw ContractError("H4: penalty violates h(s) >= alpha/2 s^2 at s=" + std::to_string(a));
        for (int j = i + 1; j < n; ++j) {
            const double b = bound * j / (n - 1);
            const double mid = h(0.5 * (a + b));
            const double chord = 0.5 * ha + 0.5 * h(b);
            if (mid > chord + 1e-12 * std::max(1.0, std::abs(chord)))
                throw ContractError("H4: penalty is not convex on [0, M0]");
        }
    }
}

}  // namespace nfpc
