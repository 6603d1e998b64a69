#pragma once

#include <functional>
#include <string>

#include "nfpc/grid.hpp"

namespace nfpc {

/**
 * Convex control penalty h on [0, M0] with coercivity constant alpha,
 * h(w) >= alpha/2 w^2. `derivative` may be empty for non-smooth presets.
 */
struct Penalty {
    std::string name = "quadratic";
    double alpha = 1.0;
    std::function<double(double)> value;
    std::function<double(double)> derivative;
    /// h(w) == alpha/2 w^2 exactly; enables the closed-form argmin.
    bool pure_quadratic = false;

    double operator()(double w) const { return value(w); }
    bool differentiable() const { return static_cast<bool>(derivative); }
};

Penalty quadratic_penalty(double alpha);
/// alpha/2 w^2 + beta w, beta >= 0.
Penalty quadratic_linear_penalty(double alpha, double beta);
/// alpha/2 w^2 + c w^4, c >= 0.
Penalty quadratic_quartic_penalty(double alpha, double c);
/// alpha/2 w^2 + c max(0, w - knee); not differentiable at the knee.
Penalty quadratic_hinge_penalty(double alpha, double c, double knee);
/// alpha/2 w^2 + c (e^w - 1 - w), c >= 0.
Penalty quadratic_exp_penalty(double alpha, double c);

/// Running cost G(t, x), terminal cost G_T(x) and control penalty h.
struct CostSpec {
    std::string name = "custom";
    std::function<double(double t, const Point& x)> running;
    std::function<double(const Point& x)> terminal;
    Penalty penalty;
};

/// G = g0, G_T = gT, quadratic penalty.
CostSpec constant_cost(double running, double terminal, double alpha);

ScalarField sample_running(const CostSpec& cost, const GridSpec& grid, double t);
ScalarField sample_terminal(const CostSpec& cost, const GridSpec& grid);

/**
 * Nonnegativity of G (at every grid time) and G_T on the grid, h(0) >= 0,
 * midpoint convexity of h and h(w) >= alpha/2 w^2 on a lattice of [0, bound].
 * Throws ContractError naming the failed hypothesis.
 */
void validate_cost(const CostSpec& cost, const GridSpec& grid, double bound);

}  // namespace nfpc
