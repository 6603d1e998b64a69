#include <numbers>
#include <sstream>

#include "doctest.h"
#include "nfpc/error.hpp"
#include "support.hpp"

using namespace nfpc;
using namespace nfpc::testing;
using std::numbers::pi;

TEST_CASE("grid spec geometry and validation") {
    const GridSpec g = grid1d(1.0, 10);
    CHECK(g.dx() == doctest::Approx(0.2));
    CHECK(g.center(0) == doctest::Approx(-0.9));
    CHECK(g.center(9) == doctest::Approx(0.9));
    CHECK(g.cell_count() == 10);
    CHECK(grid2d(1.0, 10).cell_count() == 100);

    const GridSpec g2 = grid2d(2.0, 8);
    for (std::size_t c = 0; c < g2.cell_count(); ++c) {
        const auto idx = g2.unflatten(c);
        CHECK(g2.flatten(idx[0], idx[1]) == c);
        CHECK(g2.point(c)[0] == doctest::Approx(g2.center(idx[0])));
        CHECK(g2.point(c)[1] == doctest::Approx(g2.center(idx[1])));
    }

    GridSpec bad = g;
    bad.cells = 7;
    CHECK_THROWS_AS(bad.validate(), ContractError);
    bad = g;
    bad.half_width = 0.0;
    CHECK_THROWS_AS(bad.validate(), ContractError);
    bad = g;
    bad.horizon = -1.0;
    CHECK_THROWS_AS(bad.validate(), ContractError);
    bad = g;
    bad.steps = 0;
    CHECK_THROWS_AS(bad.validate(), ContractError);
    bad = g;
    bad.dim = 3;
    CHECK_THROWS_AS(bad.validate(), ContractError);
}

TEST_CASE("quadrature and norms") {
    const GridSpec g = grid1d(1.0, 64);
    CHECK(integrate(ScalarField(g, 1.0)) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(integrate(ScalarField(g, 0.0)) == 0.0);
    CHECK(l2_norm(ScalarField(g, 0.0)) == 0.0);
    CHECK(l2_norm(ScalarField(g, 1.0)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

    const ScalarField f = random_field(g, 3);
    CHECK(l1_distance(f, f) == 0.0);
    CHECK(l2_distance(f, f) == 0.0);
    CHECK(inner(f, f) == doctest::Approx(l2_norm(f) * l2_norm(f)).epsilon(1e-13));

    const ScalarField rho = gaussian_density(grid1d(4.0, 256), 0.0, 0.04);
    CHECK(std::abs(integrate(rho) - 1.0) <= 1e-12);

    const ScalarField rho2 = gaussian_density(grid2d(3.0, 64), 0.0, 0.1);
    CHECK(std::abs(integrate(rho2) - 1.0) <= 1e-12);
}

TEST_CASE("central gradient") {
    const GridSpec g = grid1d(2.0, 128);
    CHECK(gradient(ScalarField(g, 3.0)).max_norm() == 0.0);

    // Central difference of sin(kx) is k cos(kx) sin(k dx)/(k dx), so the error
    // is bounded by k^3 dx^2 / 6.
    const double L = g.half_width;
    const double k = pi / L;
    const ScalarField f = tabulate(g, [&](const Point& x) { return std::sin(k * x[0]); });
    const VectorField df = gradient(f);
    double err = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        err = std::max(err, std::abs(df.component(0)[i] - k * std::cos(k * g.point(i)[0])));
    CHECK(err <= k * k * k * g.dx() * g.dx() / 6.0 * 1.0001);
    CHECK(err >= k * k * k * g.dx() * g.dx() / 6.0 * 0.99);

    const ScalarField h = random_field(g, 5);
    const VectorField lin = gradient(2.0 * f + (-3.0) * h);
    const VectorField a = gradient(f);
    const VectorField b = gradient(h);
    for (std::size_t i = 0; i < f.size(); ++i)
        CHECK(lin.component(0)[i] == doctest::Approx(2.0 * a.component(0)[i] - 3.0 * b.component(0)[i]).epsilon(1e-12));
}

TEST_CASE("discrete laplacian eigenfunctions") {
    for (int dim : {1, 2}) {
        GridSpec g = grid1d(1.5, 48);
        g.dim = dim;
        CHECK(laplacian(ScalarField(g, 2.0)).max() == 0.0);
        const int m = 3;
        const double k = m * pi / g.half_width;
        const ScalarField f = tabulate(g, [&](const Point& x) { return std::cos(k * x[0]); });
        const ScalarField lap = laplacian(f);
        const double symbol = -(2.0 - 2.0 * std::cos(k * g.dx())) / (g.dx() * g.dx());
        for (std::size_t i = 0; i < f.size(); ++i) CHECK(lap[i] == doctest::Approx(symbol * f[i]).epsilon(1e-9).scale(1.0));
        CHECK(std::abs(integrate(laplacian(random_field(g, 9)))) <= 1e-10);
    }
}

TEST_CASE("moments of a discretised gaussian") {
    const ScalarField rho = gaussian_density(grid1d(4.0, 256), 0.3, 0.04);
    const Moments m = moments(rho);
    CHECK(m.mass == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.mean[0] == doctest::Approx(0.3).epsilon(1e-10));
    // Midpoint quadrature adds dx^2/12 to the variance of a smooth density.
    CHECK(m.variance[0] == doctest::Approx(0.04).epsilon(1e-6));
    CHECK(boundary_mass(rho) < 1e-20);
}

TEST_CASE("csv round trip is bit exact") {
    for (const GridSpec& g : {grid1d(1.0, 16), grid2d(1.0, 8)}) {
        const ScalarField f = random_field(g, 11, -1e3, 1e3);
        std::stringstream ss;
        write_csv(ss, f);
        const ScalarField back = read_csv(ss, g);
        for (std::size_t i = 0; i < f.size(); ++i) CHECK(back[i] == f[i]);
    }
    std::stringstream ss;
    write_csv(ss, ScalarField(grid1d(1.0, 16)));
    CHECK_THROWS_AS(read_csv(ss, grid1d(1.0, 32)), ContractError);
}
