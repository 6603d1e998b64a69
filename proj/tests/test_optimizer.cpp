#include <numbers>

#include "doctest.h"
#include "nfpc/error.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace nfpc;
using namespace nfpc::testing;

namespace {

CoefficientModel s_independent_model() {
    CoefficientModel m = constant_model(1, {0.1, 0.0}, 0.09);
    m.drift = [](double, const Point& x, double) { return Point{0.1 * std::sin(0.25 * std::numbers::pi * x[0]), 0.0}; };
    return m;
}

ControlProblem s_independent_problem() {
    ControlProblem pr = finance_problem(desk_finance());
    pr.model = s_independent_model();
    pr.validate();
    return pr;
}

OmegaField finance_direction(const ControlField& u) {
    PhiloxStream rng(7, 0);
    OmegaField v{u.omega(), std::vector<double>(u.size())};
    for (auto& x : v.values) x = 0.25 * u.bound() * (2.0 * rng.uniform() - 1.0);
    return v;
}

}  // namespace

TEST_CASE("cost evaluation on constant costs") {
    ControlProblem pr = finance_problem(desk_finance());
    pr.cost = constant_cost(0.0, 1.0, 1.0);
    const ControlField zero = ControlField::constant(pr.omega, pr.bound, 0.0);
    const StateEvaluation e0 = evaluate_state(pr, zero);
    CHECK(e0.cost.penalty == 0.0);
    CHECK(std::abs(e0.cost.terminal - 1.0) <= 1e-9);
    CHECK(e0.cost.running == 0.0);

    pr.cost = constant_cost(1.0, 0.0, 1.0);
    const StateEvaluation e1 = evaluate_state(pr, random_control(pr.omega, pr.bound, 4));
    CHECK(std::abs(e1.cost.running - pr.grid.horizon) <= 1e-9);
    CHECK(e1.cost.terminal == 0.0);
    CHECK(e1.cost.penalty > 0.0);
    CHECK(e1.cost.total >= 0.0);
}

TEST_CASE("closed-form argmin for the quadratic penalty") {
    const double alpha = 0.5, M0 = 2.0;
    const Penalty h = quadratic_penalty(alpha);
    CHECK(argmin_scalar(h, 0.0, M0, 1e-4) == 0.0);
    CHECK(argmin_scalar(h, -alpha * M0 / 2.0, M0, 1e-4) == doctest::Approx(M0 / 2.0));
    CHECK(argmin_scalar(h, -2.0 * alpha * M0, M0, 1e-4) == M0);
    CHECK(argmin_scalar(h, 3.0, M0, 1e-4) == 0.0);
}

TEST_CASE("ternary argmin agrees with an exhaustive scan") {
    const double M0 = 1.5;
    const double resolution = 1e-4 * M0;
    const std::vector<Penalty> penalties{quadratic_linear_penalty(0.4, 0.1), quadratic_quartic_penalty(0.4, 0.3),
                                         quadratic_exp_penalty(0.4, 0.2), quadratic_hinge_penalty(0.4, 0.5, 0.6)};
    const GridSpec g = grid1d(2.0, 64);
    const OmegaPtr om = box_omega(g, 1.0);
    PhiloxStream rng(99, 0);
    for (const Penalty& h : penalties) {
        OmegaField phi{om, std::vector<double>(om->count())};
        for (auto& v : phi.values) v = -3.0 * h.alpha * M0 + 4.0 * h.alpha * M0 * rng.uniform();
        const ControlField w = pointwise_argmin(phi, h, M0, resolution);
        for (std::size_t j = 0; j < om->count(); ++j) {
            const double best = scan_argmin(h, phi.values[j], M0, 1e-5 * M0);
            CHECK_MESSAGE(std::abs(w[j] - best) <= resolution, h.name << " phi=" << phi.values[j]);
            CHECK(w[j] >= 0.0);
            CHECK(w[j] <= M0);
        }
    }
}

TEST_CASE("switching function vanishes without s-dependence or spatial structure in p") {
    const ControlProblem si = s_independent_problem();
    const ControlField u = random_control(si.omega, si.bound, 1);
    const StateEvaluation e = evaluate_state(si, u);
    const OmegaField phi = switching_function(si, e.Su, e.rho, solve_adjoint(e.Su, si.model, si.cost));
    for (double v : phi.values) CHECK(v == 0.0);

    ControlProblem flat = finance_problem(desk_finance());
    flat.cost = constant_cost(0.0, 2.0, 0.1);
    const StateEvaluation f = evaluate_state(flat, u);
    const OmegaField phi2 = switching_function(flat, f.Su, f.rho, solve_adjoint(f.Su, flat.model, flat.cost));
    for (double v : phi2.values) CHECK(v == 0.0);
}

TEST_CASE("switching function matches direct quadrature") {
    ControlProblem pr;
    pr.grid = grid1d(2.0, 32, 1.0, 16);
    pr.omega = box_omega(pr.grid, 1.0);
    KernelParams kp;
    kp.width = 0.25;
    pr.op = std::make_shared<const ConvolutionOperator>(build_kernel(pr.grid, kp));
    pr.bound = 2.0;
    auto [model, cost] = finance_preset(desk_finance());
    pr.model = model;
    pr.cost = cost;
    pr.rho0 = gaussian_density(pr.grid, 0.0, 0.04);
    pr.validate();

    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const ControlField u = random_control(pr.omega, pr.bound, seed);
        const StateEvaluation e = evaluate_state(pr, u);
        const AdjointTrajectory p = solve_adjoint(e.Su, pr.model, pr.cost);
        const OmegaField fast = switching_function(pr, e.Su, e.rho, p);
        const std::vector<double> slow = direct_switching(pr, 0.25, u, e.rho, p);
        double scale = 0.0;
        for (double v : slow) scale = std::max(scale, std::abs(v));
        REQUIRE(scale > 0.0);
        for (std::size_t j = 0; j < slow.size(); ++j) CHECK(std::abs(fast.values[j] - slow[j]) <= 1e-10 * scale);
    }
}

TEST_CASE("sweep on an s-independent model stops after one exact step") {
    const ControlProblem pr = s_independent_problem();
    SweepConfig cfg;
    cfg.relaxation = 1.0;
    const SweepReport r = fb_sweep(pr, cfg, ControlField::constant(pr.omega, pr.bound, 1.0));
    CHECK(r.iterations == 1);
    CHECK(r.reason == Termination::residual);
    CHECK(r.residual == 0.0);
    for (double v : r.control.values()) CHECK(v == 0.0);
}

TEST_CASE("finance sweep reaches the fixed-point certificate") {
    const ControlProblem pr = finance_problem(desk_finance());
    const ControlField u0 = ControlField::constant(pr.omega, pr.bound, 1.0);
    const SweepReport r = fb_sweep(pr, SweepConfig{}, u0);
    CHECK(r.reason == Termination::residual);
    CHECK(r.iterations <= 100);
    CHECK(r.residual <= 1e-6);
    CHECK(r.cost.total <= r.history.front().cost.total);
    CHECK(r.monotonicity_violations == 0);
    // Regression value of the desk run.
    CHECK(r.cost.total == doctest::Approx(0.44222150062353743).epsilon(1e-9));

    // The certificate holds when recomputed from scratch.
    const StateEvaluation e = evaluate_state(pr, r.control);
    const OmegaField phi = switching_function(pr, e.Su, e.rho, solve_adjoint(e.Su, pr.model, pr.cost));
    const ControlField target = pointwise_argmin(phi, pr.cost.penalty, pr.bound, 1e-4 * pr.bound);
    CHECK(omega_l2_distance(r.control.as_omega_field(), target.as_omega_field()) <= 1e-6);

    for (std::size_t k = 1; k < r.history.size(); ++k)
        CHECK(r.history[k].cost.total <= r.history[k - 1].cost.total + 1e-12);
}

TEST_CASE("full relaxation on a stiff instance engages backtracking") {
    const ControlProblem pr = finance_problem(desk_finance());
    SweepConfig cfg;
    cfg.relaxation = 1.0;
    cfg.max_iter = 200;
    cfg.tol_residual = 1e-5;
    cfg.tol_control = 1e-9;
    const SweepReport r = fb_sweep(pr, cfg, ControlField::constant(pr.omega, pr.bound, 1.0));
    MESSAGE("iterations " << r.iterations << " halvings " << r.total_halvings << " violations "
                          << r.monotonicity_violations);
    CHECK(r.total_halvings > 0);
    CHECK(r.reason == Termination::residual);
    CHECK(r.residual <= cfg.tol_residual);
    CHECK(r.cost.total <= r.history.front().cost.total);
}

TEST_CASE("sweep limits and error context") {
    const ControlProblem pr = finance_problem(desk_finance());
    SweepConfig cfg;
    cfg.max_iter = 3;
    const SweepReport r = fb_sweep(pr, cfg, ControlField::constant(pr.omega, pr.bound, 1.0));
    CHECK(r.reason == Termination::max_iter);
    CHECK(r.iterations == 3);
    CHECK(r.history.size() == 4);

    cfg.relaxation = 0.0;
    CHECK_THROWS_AS(fb_sweep(pr, cfg, ControlField::constant(pr.omega, pr.bound, 1.0)), ContractError);

    ControlProblem broken = pr;
    broken.model.drift = [](double, const Point&, double s) {
        return Point{s > 0.5 ? std::numeric_limits<double>::quiet_NaN() : 0.1, 0.0};
    };
    try {
        fb_sweep(broken, SweepConfig{}, ControlField::constant(pr.omega, pr.bound, 0.0));
        FAIL("expected a model error");
    } catch (const ModelError& e) {
        CHECK(std::string(e.what()).find("sweep iteration") != std::string::npos);
    }
}

TEST_CASE("directional derivative check") {
    const ControlProblem pr = finance_problem(desk_finance());
    const ControlField u = ControlField::constant(pr.omega, pr.bound, 1.0);

    const OmegaField zero{pr.omega, std::vector<double>(u.size(), 0.0)};
    const DirectionalCheckReport z = directional_derivative_check(pr, u, zero, {1e-3});
    CHECK(z.predicted == 0.0);
    CHECK(z.rows[0].finite_difference == 0.0);

    const DirectionalCheckReport r =
        directional_derivative_check(pr, u, finance_direction(u), {1e-2, 1e-3, 1e-4, 1e-6});
    for (const auto& row : r.rows) MESSAGE("eps " << row.eps << " mismatch " << row.relative_mismatch);
    CHECK(r.rows[1].relative_mismatch <= 0.02);
    CHECK(r.rows[1].relative_mismatch < r.rows[0].relative_mismatch);
    CHECK(r.rows[2].relative_mismatch < r.rows[1].relative_mismatch);
    // Floor set by the time discretisation of the dual equation.
    CHECK(r.rows[3].relative_mismatch == doctest::Approx(0.00564).epsilon(0.05));

    // Without s-dependence only the penalty varies.
    const ControlProblem si = s_independent_problem();
    const ControlField us = random_control(si.omega, si.bound, 12);
    OmegaField v{si.omega, std::vector<double>(us.size())};
    PhiloxStream rng(5, 0);
    for (std::size_t j = 0; j < v.values.size(); ++j) v.values[j] = std::min(0.5, si.bound - us[j]) * rng.uniform();
    const DirectionalCheckReport s = directional_derivative_check(si, us, v, {1e-3});
    CHECK(s.rows[0].relative_mismatch <= 0.01);

    OmegaField big{pr.omega, std::vector<double>(u.size(), 5.0)};
    CHECK_THROWS_AS(directional_derivative_check(pr, u, big, {1.0}), ContractError);
}
