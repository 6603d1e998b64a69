#include "doctest.h"
#include "nfpc/error.hpp"
#include "support.hpp"

using namespace nfpc;
using namespace nfpc::testing;

namespace {

McConfig mc_config(std::size_t paths, double dt, const GridSpec& g, std::uint64_t seed = 1, unsigned threads = 1) {
    McConfig c;
    c.paths = paths;
    c.dt = dt;
    c.seed = seed;
    c.threads = threads;
    c.checkpoints = {0.0, 0.5 * g.horizon, g.horizon};
    return c;
}

struct SampleStats {
    double mean = 0.0, var = 0.0, se_mean = 0.0, se_var = 0.0;
};

SampleStats stats(std::span<const double> x) {
    SampleStats s;
    const double n = static_cast<double>(x.size());
    for (double v : x) s.mean += v;
    s.mean /= n;
    double m4 = 0.0;
    for (double v : x) {
        const double d = v - s.mean;
        s.var += d * d;
        m4 += d * d * d * d;
    }
    s.var /= n - 1.0;
    m4 /= n;
    s.se_mean = std::sqrt(s.var / n);
    s.se_var = std::sqrt((m4 - s.var * s.var) / n);
    return s;
}

}  // namespace

TEST_CASE("philox known-answer vectors") {
    using A4 = std::array<std::uint32_t, 4>;
    CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("philox streams") {
    PhiloxStream a(5, 3), b(5, 3), c(5, 4);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const std::uint32_t x = a.next_u32();
        CHECK(x == b.next_u32());
        differs = differs || x != c.next_u32();
    }
    CHECK(differs);

    PhiloxStream r(1, 0);
    double sum = 0.0, sum2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
    sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = r.normal();
        sum += z;
        sum2 += z * z;
    }
    CHECK(std::abs(sum / n) < 4.0 / std::sqrt(n));
    CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("interpolation is exact for (bi)linear fields") {
    const GridSpec g = grid1d(2.0, 32);
    const ScalarField f = tabulate(g, [](const Point& x) { return 3.0 * x[0] - 1.0; });
    for (double x : {-1.3, -0.01, 0.0, 0.77, 1.5}) CHECK(interpolate(f, {x, 0.0}) == doctest::Approx(3.0 * x - 1.0));
    const GridSpec g2 = grid2d(2.0, 32);
    const ScalarField h = tabulate(g2, [](const Point& x) { return x[0] * x[1] + x[1]; });
    for (Point p : {Point{0.3, -0.4}, Point{-1.1, 0.9}}) CHECK(interpolate(h, p) == doctest::Approx(p[0] * p[1] + p[1]));
}

TEST_CASE("paths are reproducible and independent of the thread count") {
    const GridSpec g = grid1d(4.0, 128);
    const CoefficientModel m = constant_model(1, {0.1, 0.0}, 0.2);
    const ScalarField rho0 = gaussian_density(g, 0.0, 0.04);
    const McResult a = simulate_paths(ScalarField(g), m, rho0, mc_config(5000, 0.01, g, 3, 1));
    const McResult b = simulate_paths(ScalarField(g), m, rho0, mc_config(5000, 0.01, g, 3, 1));
    const McResult c = simulate_paths(ScalarField(g), m, rho0, mc_config(5000, 0.01, g, 3, 4));
    const McResult d = simulate_paths(ScalarField(g), m, rho0, mc_config(5000, 0.01, g, 4, 1));
    REQUIRE(a.positions.size() == 3);
    CHECK(a.positions == b.positions);
    CHECK(a.positions == c.positions);
    CHECK(a.positions != d.positions);
    const EmpiricalDensity ha = empirical_density(a.samples(2), g);
    const EmpiricalDensity hc = empirical_density(c.samples(2), g);
    CHECK(ha.density.values() == hc.density.values());
}

TEST_CASE("sample moments match the analytic ones") {
    const GridSpec g = grid1d(4.0, 256);
    const ScalarField rho0 = gaussian_density(g, 0.0, 0.04);
    const Moments m0 = moments(rho0);
    // Draws are uniform within a cell, which adds dx^2/12 to the variance.
    const double var0 = m0.variance[0] + g.dx() * g.dx() / 12.0;

    // Constant coefficients make the Euler scheme exact in law, so large steps suffice.
    const McResult drift = simulate_paths(ScalarField(g), constant_model(1, {0.3, 0.0}, 1e-4), rho0,
                                          mc_config(100000, 0.05, g, 21));
    const SampleStats sd = stats(drift.samples(2));
    CHECK(std::abs(sd.mean - (m0.mean[0] + 0.3)) <= 3.0 * sd.se_mean);

    const McResult heat = simulate_paths(ScalarField(g), constant_model(1, {0.0, 0.0}, 0.2), rho0,
                                         mc_config(100000, 0.05, g, 22));
    const SampleStats sh = stats(heat.samples(2));
    CHECK(std::abs(sh.var - (var0 + 0.2)) <= 3.0 * sh.se_var);
    CHECK(heat.wrap_events == 0);
}

TEST_CASE("histograms") {
    const GridSpec g = grid1d(1.0, 16);
    const std::vector<double> spike(1000, 0.3);
    const EmpiricalDensity s = empirical_density(spike, g);
    CHECK(s.density.max() == doctest::Approx(1.0 / g.dx()));
    CHECK(integrate(s.density) == doctest::Approx(1.0));

    std::vector<double> partial{0.1, 0.2, 5.0, -3.0};
    const EmpiricalDensity p = empirical_density(partial, g);
    CHECK(p.retained_fraction == 0.5);
    CHECK(integrate(p.density) == doctest::Approx(0.5));

    const GridSpec gu = grid1d(1.0, 64);
    PhiloxStream rng(8, 0);
    std::vector<double> uni(1000000);
    for (double& x : uni) x = -1.0 + 2.0 * rng.uniform();
    const EmpiricalDensity u = empirical_density(uni, gu);
    const double per_cell = 1e6 / 64.0;
    for (double v : u.density.values()) CHECK(std::abs(v / 0.5 - 1.0) <= 5.0 / std::sqrt(per_cell));

    const EmpiricalDensity h2 = empirical_density(std::vector<double>{0.1, 0.1, 0.9, -0.9}, grid2d(1.0, 8));
    CHECK(integrate(h2.density) == doctest::Approx(1.0));

    CHECK(nfpc::compare_mc_pde(u.density, u.density).l1 == 0.0);
    CHECK_THROWS_AS(nfpc::compare_mc_pde(u.density, s.density), ContractError);
    CHECK_THROWS_AS(empirical_density(std::vector<double>{}, g), ContractError);
}

TEST_CASE("histogram binning coarser than the grid") {
    const GridSpec g = grid1d(2.0, 64);
    const GridSpec h = histogram_grid(g, 16);
    CHECK(h.cells == 16);
    const ScalarField f = random_field(g, 4, 0.0, 1.0);
    CHECK(integrate(nfpc::coarsen(f, h)) == doctest::Approx(integrate(f)).epsilon(1e-13));
    CHECK_THROWS_AS(nfpc::coarsen(f, histogram_grid(g, 24)), ContractError);
    McConfig c = mc_config(10, 0.1, g);
    c.bins = 24;
    CHECK_THROWS_AS(c.validate(g), ContractError);
}

TEST_CASE("monte carlo cost estimates") {
    const GridSpec g = grid1d(4.0, 128, 1.0, 20);
    McConfig c = mc_config(2000, 0.05, g);
    c.checkpoints.clear();
    for (int n = 0; n <= g.steps; ++n) c.checkpoints.push_back(g.time(n));
    const McResult r = simulate_paths(ScalarField(g), constant_model(1, {0.0, 0.0}, 0.2),
                                      gaussian_density(g, 0.0, 0.04), c);
    const McCostEstimate t = estimate_cost_mc(r, constant_cost(0.0, 1.0, 1.0), g.horizon);
    CHECK(t.terminal == 1.0);
    CHECK(t.se_terminal == 0.0);
    const McCostEstimate run = estimate_cost_mc(r, constant_cost(1.0, 0.0, 1.0), g.horizon);
    CHECK(run.running == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(run.se_running == 0.0);
    CHECK(run.terminal == 0.0);

    McConfig partial = mc_config(100, 0.05, g);
    partial.checkpoints = {0.5, 1.0};
    const McResult pr = simulate_paths(ScalarField(g), constant_model(1, {0.0, 0.0}, 0.2),
                                       gaussian_density(g, 0.0, 0.04), partial);
    CHECK_THROWS_AS(estimate_cost_mc(pr, constant_cost(1.0, 0.0, 1.0), g.horizon), ContractError);
}

TEST_CASE("heat kernel: empirical density against the PDE") {
    const GridSpec g = grid1d(4.0, 128);
    const CoefficientModel m = constant_model(1, {0.0, 0.0}, 0.2);
    const ScalarField rho0 = gaussian_density(g, 0.0, 0.04);
    const ScalarField pde = solve_forward(ScalarField(g), m, rho0).final_state();
    std::vector<double> l1;
    for (std::size_t n : {10000u, 40000u, 160000u}) {
        const McResult r = simulate_paths(ScalarField(g), m, rho0, mc_config(n, 0.1, g, 5));
        const EmpiricalDensity emp = empirical_density(r.samples(2), g);
        CHECK(emp.retained_fraction >= 0.999);
        l1.push_back(nfpc::compare_mc_pde(emp.density, pde).l1);
        MESSAGE("paths " << n << " L1 " << l1.back());
    }
    CHECK(l1[1] < l1[0]);
    CHECK(l1[2] < l1[1]);

    const McResult r = simulate_paths(ScalarField(g), m, rho0, mc_config(100000, 0.1, g, 11));
    CHECK(nfpc::compare_mc_pde(empirical_density(r.samples(2), g).density, pde).l1 <= 0.05);
}

TEST_CASE("configuration checks") {
    const GridSpec g = grid1d(1.0, 16);
    McConfig c = mc_config(0, 0.1, g);
    CHECK_THROWS_AS(c.validate(g), ContractError);
    c = mc_config(10, -0.1, g);
    CHECK_THROWS_AS(c.validate(g), ContractError);
    c = mc_config(10, 0.1, g);
    c.checkpoints = {2.0};
    CHECK_THROWS_AS(c.validate(g), ContractError);
}
