#include "nfpc/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

#include "nfpc/error.hpp"
#include "nfpc/philox.hpp"

namespace nfpc {

void McConfig::validate(const GridSpec& grid) const {
    if (paths < 1) throw ContractError("monte carlo: path count must be >= 1");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ContractError("monte carlo: dt must be positive");
    if (bins < 0 || (bins > 0 && bins < 8)) throw ContractError("monte carlo: bins must be 0 or >= 8");
    if (bins > 0 && grid.cells % bins != 0) throw ContractError("monte carlo: bins must divide the grid cell count");
    for (double t : checkpoints)
        if (!(t >= 0.0 && t <= grid.horizon * (1.0 + 1e-12)))
            throw ContractError("monte carlo: checkpoint outside [0, T]");
}

double interpolate(const ScalarField& f, const Point& x) {
    const GridSpec& g = f.grid();
    const int n = g.cells;
    std::array<int, 2> i0{0, 0};
    std::array<double, 2> w{0.0, 0.0};
    for (int k = 0; k < g.dim; ++k) {
        const double xi = (x[k] + g.half_width) / g.dx() - 0.5;
        const double fl = std::floor(xi);
        w[k] = xi - fl;
        i0[k] = ((static_cast<int>(fl) % n) + n) % n;
    }
    const int x1 = i0[0] + 1 == n ? 0 : i0[0] + 1;
    if (g.dim == 1) return (1.0 - w[0]) * f[static_cast<std::size_t>(i0[0])] + w[0] * f[static_cast<std::size_t>(x1)];
    const int y1 = i0[1] + 1 == n ? 0 : i0[1] + 1;
    return (1.0 - w[0]) * (1.0 - w[1]) * f[g.flatten(i0[0], i0[1])] + w[0] * (1.0 - w[1]) * f[g.flatten(x1, i0[1])] +
           (1.0 - w[0]) * w[1] * f[g.flatten(i0[0], y1)] + w[0] * w[1] * f[g.flatten(x1, y1)];
}

namespace {

/// Draws initial positions from a cell-centred density.
class InitialSampler {
public:
    explicit InitialSampler(const ScalarField& rho) : rho_(rho), grid_(rho.grid()) {
        if (grid_.dim == 1) {
            cdf_.resize(rho.size());
            double acc = 0.0;
            for (std::size_t i = 0; i < rho.size(); ++i) {
                acc += std::max(rho[i], 0.0);
                cdf_[i] = acc;
            }
            for (double& c : cdf_) c /= acc;
            cdf_.back() = 1.0;
        } else {
            peak_ = rho.max();
        }
    }

    Point draw(PhiloxStream& rng) const {
        const double dx = grid_.dx();
        if (grid_.dim == 1) {
            const double u = rng.uniform();
            const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
            const auto i = static_cast<int>(std::min<std::ptrdiff_t>(it - cdf_.begin(), grid_.cells - 1));
            return {grid_.center(i) + (rng.uniform() - 0.5) * dx, 0.0};
        }
        const double width = 2.0 * grid_.half_width;
        for (;;) {
            const Point p{-grid_.half_width + rng.uniform() * width, -grid_.half_width + rng.uniform() * width};
            const int ix = std::min(grid_.cells - 1, static_cast<int>((p[0] + grid_.half_width) / dx));
            const int iy = std::min(grid_.cells - 1, static_cast<int>((p[1] + grid_.half_width) / dx));
            if (rng.uniform() * peak_ < rho_[grid_.flatten(ix, iy)]) return p;
        }
    }

private:
    const ScalarField& rho_;
    GridSpec grid_;
    std::vector<double> cdf_;
    double peak_ = 0.0;
};

inline double wrap_into_box(double x, double L, bool& wrapped) {
    if (x >= -L && x < L) return x;
    wrapped = true;
    const double width = 2.0 * L;
    double y = x - width * std::floor((x + L) / width);
    if (y >= L) y -= width;
    return y;
}

}  // namespace

McResult simulate_paths(const ScalarField& Su, const CoefficientModel& model, const ScalarField& rho0,
                        const McConfig& config) {
    const GridSpec& g = Su.grid();
    config.validate(g);
    if (!(rho0.grid() == g)) throw ContractError("monte carlo: initial density grid mismatch");
    if (model.dim != g.dim) throw ContractError("monte carlo: model dimension does not match grid");

    McResult res;
    res.dim = g.dim;
    res.paths = config.paths;
    res.steps = std::max(1, static_cast<int>(std::ceil(g.horizon / config.dt - 1e-9)));
    res.dt = g.horizon / res.steps;

    std::vector<int> checkpoint_step;
    for (double t : config.checkpoints) {
        const int s = std::clamp(static_cast<int>(std::llround(t / res.dt)), 0, res.steps);
        checkpoint_step.push_back(s);
        res.times.push_back(s * res.dt);
    }
    const std::size_t dim = static_cast<std::size_t>(g.dim);
    res.positions.assign(checkpoint_step.size(), std::vector<double>(config.paths * dim));

    const InitialSampler sampler(rho0);
    std::vector<std::uint32_t> wraps(config.paths, 0);
    const double sqdt = std::sqrt(res.dt);
    const double L = g.half_width;

    auto run_path = [&](std::size_t i) {
        PhiloxStream rng(config.seed, i);
        Point x = sampler.draw(rng);
        auto record = [&](int step) {
            for (std::size_t c = 0; c < checkpoint_step.size(); ++c)
                if (checkpoint_step[c] == step)
                    for (std::size_t k = 0; k < dim; ++k) res.positions[c][i * dim + k] = x[k];
        };
        record(0);
        for (int n = 0; n < res.steps; ++n) {
            const double t = n * res.dt;
            const double s = interpolate(Su, x);
            const Point b = model.drift(t, x, s);
            const double sig = model.sigma(t, x, s);
            bool wrapped = false;
            for (std::size_t k = 0; k < dim; ++k) {
                const double next = x[k] + b[k] * res.dt + sig * sqdt * rng.normal();
                if (!std::isfinite(next)) {
                    std::ostringstream msg;
                    msg << "monte carlo: non-finite position on path " << i << " at step " << n + 1;
                    throw SolverError(msg.str());
                }
                x[k] = wrap_into_box(next, L, wrapped);
            }
            if (wrapped) ++wraps[i];
            record(n + 1);
        }
    };

    const unsigned threads = std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(config.paths)));
    if (threads == 1) {
        for (std::size_t i = 0; i < config.paths; ++i) run_path(i);
    } else {
        std::vector<std::exception_ptr> errors(threads);
        std::vector<std::thread> pool;
        const std::size_t chunk = (config.paths + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                const std::size_t lo = t * chunk, hi = std::min(config.paths, lo + chunk);
                try {
                    for (std::size_t i = lo; i < hi; ++i) run_path(i);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    std::size_t wrapped_paths = 0;
    for (std::uint32_t w : wraps) {
        res.wrap_events += w;
        wrapped_paths += w > 0 ? 1 : 0;
    }
    res.wrapped_path_fraction = static_cast<double>(wrapped_paths) / static_cast<double>(config.paths);
    const double event_fraction =
        static_cast<double>(res.wrap_events) / (static_cast<double>(config.paths) * res.steps);
    if (event_fraction > 1e-3) {
        std::ostringstream msg;
        msg << "paths wrapped around the periodic box on " << event_fraction * 100.0
            << "% of steps (> 0.1%); enlarge the domain";
        res.warnings.push_back(msg.str());
    }
    if (res.wrapped_path_fraction > 1e-3) {
        std::ostringstream msg;
        msg << "retained fraction " << 1.0 - res.wrapped_path_fraction << " below 0.999 (domain exit)";
        res.warnings.push_back(msg.str());
    }
    return res;
}

McResult simulate_paths(const ControlField& u, const NonlocalOperator& op, const CoefficientModel& model,
                        const ScalarField& rho0, const McConfig& config) {
    return simulate_paths(op.apply(u), model, rho0, config);
}

GridSpec histogram_grid(const GridSpec& grid, int bins) {
    GridSpec g = grid;
    if (bins > 0) g.cells = bins;
    return g;
}

ScalarField coarsen(const ScalarField& f, const GridSpec& coarse) {
    const GridSpec& fine = f.grid();
    if (coarse.dim != fine.dim || coarse.half_width != fine.half_width || coarse.cells <= 0 ||
        fine.cells % coarse.cells != 0)
        throw ContractError("coarsen: incompatible grids");
    const int r = fine.cells / coarse.cells;
    ScalarField out(coarse);
    const double w = 1.0 / std::pow(static_cast<double>(r), fine.dim);
    for (std::size_t c = 0; c < f.size(); ++c) {
        const auto idx = fine.unflatten(c);
        out[coarse.flatten(idx[0] / r, fine.dim == 2 ? idx[1] / r : 0)] += w * f[c];
    }
    return out;
}

EmpiricalDensity empirical_density(std::span<const double> samples, const GridSpec& grid) {
    const std::size_t dim = static_cast<std::size_t>(grid.dim);
    if (samples.size() % dim != 0) throw ContractError("histogram: sample array is not a multiple of dim");
    const std::size_t count = samples.size() / dim;
    if (count == 0) throw ContractError("histogram: no samples");
    std::vector<std::uint64_t> hist(grid.cell_count(), 0);
    const double L = grid.half_width;
    const double dx = grid.dx();
    std::size_t kept = 0;
    for (std::size_t i = 0; i < count; ++i) {
        std::array<int, 2> idx{0, 0};
        bool inside = true;
        for (std::size_t k = 0; k < dim; ++k) {
            const double x = samples[i * dim + k];
            if (!(x >= -L && x < L)) {
                inside = false;
                break;
            }
            idx[k] = std::min(grid.cells - 1, static_cast<int>((x + L) / dx));
        }
        if (!inside) continue;
        ++hist[grid.flatten(idx[0], idx[1])];
        ++kept;
    }
    EmpiricalDensity out;
    out.samples = count;
    out.retained_fraction = static_cast<double>(kept) / static_cast<double>(count);
    out.density = ScalarField(grid);
    const double scale = 1.0 / (static_cast<double>(count) * grid.cell_volume());
    for (std::size_t c = 0; c < hist.size(); ++c) out.density[c] = static_cast<double>(hist[c]) * scale;
    return out;
}

McCostEstimate estimate_cost_mc(const McResult& result, const CostSpec& cost, double horizon) {
    const std::size_t nc = result.times.size();
    if (nc == 0) throw ContractError("monte carlo cost: no checkpoints recorded");
    if (result.times.front() != 0.0 || std::abs(result.times.back() - horizon) > 1e-12 * horizon)
        throw ContractError("monte carlo cost: checkpoints must span [0, T]");
    for (std::size_t c = 1; c < nc; ++c)
        if (!(result.times[c] > result.times[c - 1]))
            throw ContractError("monte carlo cost: checkpoints must be strictly increasing");

    // Welford accumulators: exact zero spread for path-independent costs.
    struct Running {
        double mean = 0.0, m2 = 0.0;
        std::size_t k = 0;
        void add(double x) {
            ++k;
            const double d = x - mean;
            mean += d / static_cast<double>(k);
            m2 += d * (x - mean);
        }
        double standard_error() const {
            if (k < 2) return 0.0;
            const double n = static_cast<double>(k);
            return std::sqrt(std::max(0.0, m2 / (n - 1.0)) / n);
        }
    };

    const std::size_t dim = static_cast<std::size_t>(result.dim);
    Running run_acc, term_acc, total_acc;
    for (std::size_t i = 0; i < result.paths; ++i) {
        auto pos = [&](std::size_t c) {
            Point x{0.0, 0.0};
            for (std::size_t k = 0; k < dim; ++k) x[k] = result.positions[c][i * dim + k];
            return x;
        };
        double run = 0.0;
        double prev = cost.running(result.times[0], pos(0));
        for (std::size_t c = 1; c < nc; ++c) {
            const double cur = cost.running(result.times[c], pos(c));
            run += 0.5 * (prev + cur) * (result.times[c] - result.times[c - 1]);
            prev = cur;
        }
        const double term = cost.terminal(pos(nc - 1));
        run_acc.add(run);
        term_acc.add(term);
        total_acc.add(run + term);
    }
    McCostEstimate e;
    e.running = run_acc.mean;
    e.terminal = term_acc.mean;
    e.total = e.running + e.terminal;
    e.se_running = run_acc.standard_error();
    e.se_terminal = term_acc.standard_error();
    e.se_total = total_acc.standard_error();
    return e;
}

DensityComparison compare_mc_pde(const ScalarField& empirical, const ScalarField& pde) {
    if (!(empirical.grid() == pde.grid())) throw ContractError("compare: empirical and PDE grids differ");
    DensityComparison d;
    d.l1 = l1_distance(empirical, pde);
    for (std::size_t c = 0; c < pde.size(); ++c) d.max_cell = std::max(d.max_cell, std::abs(empirical[c] - pde[c]));
    return d;
}

}  // namespace nfpc
