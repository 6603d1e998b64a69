#include <numbers>

#include "doctest.h"
#include "nfpc/error.hpp"
#include "support.hpp"

using namespace nfpc;
using namespace nfpc::testing;

namespace {

// Spatially varying but s-independent coefficients.
CoefficientModel s_independent_model() {
    CoefficientModel m;
    m.name = "s-independent";
    m.dim = 1;
    m.drift = [](double, const Point& x, double) { return Point{0.1 * std::sin(0.25 * std::numbers::pi * x[0]), 0.0}; };
    m.drift_ds = [](double, const Point&, double) { return Point{0.0, 0.0}; };
    m.sigma = [](double, const Point& x, double) { return 0.3 + 0.05 * std::cos(0.25 * std::numbers::pi * x[0]); };
    m.q_ds = [](double, const Point&, double) { return 0.0; };
    m.gamma = 0.0625;
    m.drift_bound = 0.1;
    m.q_bound = 0.1225;
    return m;
}

}  // namespace

TEST_CASE("constant costs give closed-form duals") {
    const GridSpec g = grid1d(2.0, 64);
    const ScalarField s(g);
    const CoefficientModel m = constant_model(1, {0.2, 0.0}, 0.1);

    const AdjointTrajectory c = solve_adjoint(s, m, constant_cost(0.0, 1.5, 1.0));
    for (const auto& p : c.states)
        for (double v : p.values()) CHECK(v == 1.5);

    const AdjointTrajectory lin = solve_adjoint(s, m, constant_cost(0.7, 0.0, 1.0));
    for (int n = 0; n <= g.steps; ++n)
        for (double v : lin.at(n).values()) CHECK(std::abs(v - 0.7 * (g.horizon - g.time(n))) <= 1e-12);
}

TEST_CASE("terminal condition is exact and the model must be autonomous") {
    const ControlProblem pr = finance_problem(desk_finance());
    const ScalarField su = pr.op->apply(random_control(pr.omega, pr.bound, 2));
    const AdjointTrajectory p = solve_adjoint(su, pr.model, pr.cost);
    CHECK(p.states.size() == static_cast<std::size_t>(pr.grid.steps) + 1);
    CHECK(p.states.back().values() == sample_terminal(pr.cost, pr.grid).values());
    for (const auto& s : p.states) CHECK(s.all_finite());

    CoefficientModel tm = pr.model;
    tm.time_independent = false;
    CHECK_THROWS_AS(solve_adjoint(su, tm, pr.cost), ContractError);
}

TEST_CASE("discrete maximum principle without running cost") {
    FinanceParams fp = desk_finance();
    fp.lambda_run = 0.0;
    const ControlProblem pr = finance_problem(fp);
    const ScalarField su = pr.op->apply(ControlField::constant(pr.omega, pr.bound, 1.0));
    const AdjointTrajectory p = solve_adjoint(su, pr.model, pr.cost);
    const ScalarField gt = sample_terminal(pr.cost, pr.grid);
    for (const auto& s : p.states) {
        CHECK(s.min() >= gt.min() - 1e-8);
        CHECK(s.max() <= gt.max() + 1e-8);
    }
}

TEST_CASE("comparison principle in the running cost") {
    FinanceParams lo = desk_finance(), hi = desk_finance();
    hi.lambda_run = 2.0;
    const ControlProblem a = finance_problem(lo), b = finance_problem(hi);
    const ScalarField su = a.op->apply(random_control(a.omega, a.bound, 6));
    const AdjointTrajectory pa = solve_adjoint(su, a.model, a.cost);
    const AdjointTrajectory pb = solve_adjoint(su, b.model, b.cost);
    for (int n = 0; n <= a.grid.steps; ++n)
        for (std::size_t i = 0; i < su.size(); ++i) CHECK(pb.at(n)[i] >= pa.at(n)[i]);
}

TEST_CASE("duality identity for an s-independent model") {
    const GridSpec g = grid1d(4.0, 256);
    const CoefficientModel m = s_independent_model();
    const auto [fm, cost] = finance_preset(FinanceParams{});
    const ScalarField su(g);
    const ScalarField rho0 = gaussian_density(g, 0.0, 0.04);
    const DensityTrajectory rho = solve_forward(su, m, rho0);
    const AdjointTrajectory p = solve_adjoint(su, m, cost);

    double running = 0.0;
    for (int n = 0; n <= g.steps; ++n)
        running += ((n == 0 || n == g.steps) ? 0.5 : 1.0) * inner(sample_running(cost, g, g.time(n)), rho.at(n));
    running *= g.dt();
    const double direct = running + inner(sample_terminal(cost, g), rho.final_state());
    const double dual = inner(rho0, p.at(0));
    MESSAGE("duality: " << dual << " vs " << direct);
    CHECK(rel(dual, direct) <= 0.02);
}
