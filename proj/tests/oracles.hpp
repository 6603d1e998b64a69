#pragma once

#include <cmath>
#include <vector>

#include "nfpc/optimizer.hpp"

namespace nfpc::testing {

// Signed periodic displacement i - j in cells, in the kernel's storage convention.
inline int wrap_displacement(int i, int j, int n) {
    int m = ((i - j) % n + n) % n;
    return m < (n + 1) / 2 ? m : m - n;
}

/// Switching function of a 1-d problem with a normalised gaussian kernel, summed
/// term by term: every x' for every x at every stored time, with the kernel
/// evaluated from its formula and Su recomputed by a direct double loop.
inline std::vector<double> direct_switching(const ControlProblem& pr, double sigma, const ControlField& u,
                                            const DensityTrajectory& rho, const AdjointTrajectory& p) {
    const GridSpec& g = pr.grid;
    const int n = g.cells;
    const double dx = g.dx();
    std::vector<double> kraw(n);
    double mass = 0.0;
    for (int m = 0; m < n; ++m) {
        const double r = wrap_displacement(m, 0, n) * dx;
        kraw[m] = std::exp(-r * r / (2 * sigma * sigma));
        mass += kraw[m] * dx;
    }
    auto K = [&](int i, int j) { return kraw[((i - j) % n + n) % n] / mass; };

    const ScalarField uz = u.zero_extended();
    std::vector<double> su(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) su[i] += K(i, j) * uz[j] * dx;

    std::vector<double> phi;
    for (std::size_t c : pr.omega->cells()) {
        const int j = static_cast<int>(c);
        double total = 0.0;
        for (int t = 0; t <= g.steps; ++t) {
            const double w = ((t == 0 || t == g.steps) ? 0.5 : 1.0) * g.dt();
            const ScalarField& r = rho.at(t);
            const ScalarField& q = p.at(t);
            for (int i = 0; i < n; ++i) {
                const double pl = q[(i + n - 1) % n], pc = q[i], pr_ = q[(i + 1) % n];
                const double dp = (pr_ - pl) / (2 * dx);
                const double lap = (pr_ - 2 * pc + pl) / (dx * dx);
                const Point x = g.point(i);
                const double bs = pr.model.drift_ds(0.0, x, su[i])[0];
                const double qs = pr.model.q_ds(0.0, x, su[i]);
                total += w * K(i, j) * dx * (bs * dp * r[i] + 0.5 * qs * r[i] * lap);
            }
        }
        phi.push_back(total);
    }
    return phi;
}

/// Minimiser of h(w) + w phi over the lattice {0, step, ..., bound}; ties go to the smaller w.
inline double scan_argmin(const Penalty& h, double phi, double bound, double step) {
    const long n = std::lround(bound / step);
    double best = 0.0, best_val = h(0.0);
    for (long k = 1; k <= n; ++k) {
        const double x = k * step;
        const double val = h(x) + x * phi;
        if (val < best_val) {
            best = x;
            best_val = val;
        }
    }
    return best;
}

}  // namespace nfpc::testing
