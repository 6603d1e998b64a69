#include "nfpc/forward.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "nfpc/error.hpp"

namespace nfpc {

CoefficientModel constant_model(int dim, Point drift, double q0) {
    CoefficientModel m;
    m.name = "constant";
    m.dim = dim;
    if (dim == 1) drift[1] = 0.0;
    const double sig = std::sqrt(q0);
    m.drift = [drift](double, const Point&, double) { return drift; };
    m.drift_ds = [](double, const Point&, double) { return Point{0.0, 0.0}; };
    m.sigma = [sig](double, const Point&, double) { return sig; };
    m.q_ds = [](double, const Point&, double) { return 0.0; };
    m.gamma = q0;
    m.drift_bound = std::max(std::abs(drift[0]), std::abs(drift[1]));
    m.q_bound = q0;
    return m;
}

namespace {

std::string sample_text(double t, const Point& x, double s, int dim) {
    char buf[160];
    if (dim == 1)
        std::snprintf(buf, sizeof buf, "(t=%.6g, x=%.6g, s=%.6g)", t, x[0], s);
    else
        std::snprintf(buf, sizeof buf, "(t=%.6g, x=(%.6g, %.6g), s=%.6g)", t, x[0], x[1], s);
    return buf;
}

}  // namespace

void validate_model(const CoefficientModel& model, const GridSpec& grid, double s_max) {
    grid.validate();
    if (model.dim != grid.dim) throw ContractError("model: dimension does not match grid");
    if (!model.drift || !model.sigma || !model.drift_ds || !model.q_ds)
        throw ContractError("model: missing coefficient evaluator");
    if (!(model.gamma > 0.0)) throw ContractError("H2: ellipticity constant gamma must be positive");
    if (!(model.q_bound >= model.gamma)) throw ContractError("H2: q bound must be >= gamma");
    if (!(model.drift_bound >= 0.0) || !std::isfinite(model.drift_bound))
        throw ContractError("H1: drift bound must be finite and nonnegative");

    const int stride = std::max(1, grid.cells / 32);
    std::vector<double> times{0.0};
    if (!model.time_independent) times = {0.0, 0.5 * grid.horizon, grid.horizon};
    constexpr int s_points = 9;
    const double tol = 1e-12;

    for (std::size_t c = 0; c < grid.cell_count(); ++c) {
        const auto [ix, iy] = grid.unflatten(c);
        if (ix % stride != 0 || iy % stride != 0) continue;
        const Point x = grid.point(c);
        for (double t : times) {
            for (int k = 0; k < s_points; ++k) {
                const double s = s_max * k / (s_points - 1);
                const Point b = model.drift(t, x, s);
                const Point bs = model.drift_ds(t, x, s);
                const double q = model.q(t, x, s);
                const double qs = model.q_ds(t, x, s);
                for (int a = 0; a < grid.dim; ++a) {
                    if (!std::isfinite(b[a]) || !std::isfinite(bs[a]))
                        throw ContractError("H1: drift not finite at sample " + sample_text(t, x, s, grid.dim));
                    if (std::abs(b[a]) > model.drift_bound * (1.0 + tol))
                        throw ContractError("H1: |b| exceeds declared bound at sample " + sample_text(t, x, s, grid.dim));
                }
                if (!std::isfinite(q) || !std::isfinite(qs))
                    throw ContractError("H2: q not finite at sample " + sample_text(t, x, s, grid.dim));
                if (q < model.gamma * (1.0 - tol))
                    throw ContractError("H2: q < gamma at sample " + sample_text(t, x, s, grid.dim));
                if (q > model.q_bound * (1.0 + tol))
                    throw ContractError("H2: q exceeds declared bound at sample " + sample_text(t, x, s, grid.dim));
            }
        }
    }
}

CoefficientSample sample_coefficients(const CoefficientModel& model, const ScalarField& Su, double t) {
    const GridSpec& g = Su.grid();
    CoefficientSample out{VectorField(g), ScalarField(g)};
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        const Point x = g.point(c);
        const Point b = model.drift(t, x, Su[c]);
        for (int k = 0; k < g.dim; ++k) out.drift.component(k)[c] = b[k];
        out.q[c] = model.q(t, x, Su[c]);
    }
    if (!out.drift.all_finite() || !out.q.all_finite())
        throw ModelError("model '" + model.name + "': coefficient evaluator returned a non-finite value");
    return out;
}

SensitivitySample sample_sensitivities(const CoefficientModel& model, const ScalarField& Su, double t) {
    const GridSpec& g = Su.grid();
    SensitivitySample out{VectorField(g), ScalarField(g)};
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        const Point x = g.point(c);
        const Point bs = model.drift_ds(t, x, Su[c]);
        for (int k = 0; k < g.dim; ++k) out.drift_ds.component(k)[c] = bs[k];
        out.q_ds[c] = model.q_ds(t, x, Su[c]);
    }
    if (!out.drift_ds.all_finite() || !out.q_ds.all_finite())
        throw ModelError("model '" + model.name + "': sensitivity evaluator returned a non-finite value");
    return out;
}

double cfl_timestep(const CoefficientModel& model, const GridSpec& grid) {
    const double dx = grid.dx();
    double dt = dx * dx / (grid.dim * model.q_bound);
    if (model.drift_bound > 0.0) dt = std::min(dt, dx / (2.0 * model.drift_bound));
    return 0.9 * dt;
}

int substeps_per_step(const CoefficientModel& model, const GridSpec& grid) {
    const double ratio = grid.dt() / cfl_timestep(model, grid);
    return std::max(1, static_cast<int>(std::ceil(ratio - 1e-12)));
}

// ---------------------------------------------------------------------------

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

ScalarField make_initial_density(const GridSpec& grid, const InitialDensityParams& params) {
    grid.validate();
    ScalarField rho(grid);
    const double L = grid.half_width;

    if (params.type == DensityPreset::uniform) {
        for (int k = 0; k < grid.dim; ++k) {
            if (!(params.lower[k] < params.upper[k]))
                throw ContractError("H3: uniform density box is empty");
            if (params.lower[k] < -L || params.upper[k] > L)
                throw ContractError("H3: uniform density box leaves the domain");
        }
        for (std::size_t c = 0; c < rho.size(); ++c) {
            const Point p = grid.point(c);
            bool in = true;
            for (int k = 0; k < grid.dim; ++k) in = in && p[k] >= params.lower[k] && p[k] <= params.upper[k];
            rho[c] = in ? 1.0 : 0.0;
        }
    } else {
        if (params.components.empty()) throw ContractError("H3: density has no components");
        if (params.type == DensityPreset::gaussian && params.components.size() != 1)
            throw ContractError("H3: gaussian preset takes exactly one component");
        double wsum = 0.0;
        double outside = 0.0;
        for (const auto& comp : params.components) {
            if (!(comp.weight >= 0.0)) throw ContractError("H3: mixture weights must be nonnegative");
            if (!(comp.variance > 0.0)) throw ContractError("H3: gaussian variance must be positive");
            wsum += comp.weight;
            const double sd = std::sqrt(comp.variance);
            double inside = 1.0;
            for (int k = 0; k < grid.dim; ++k)
                inside *= normal_cdf((L - comp.mean[k]) / sd) - normal_cdf((-L - comp.mean[k]) / sd);
            outside += comp.weight * (1.0 - inside);
        }
        if (std::abs(wsum - 1.0) > 1e-12) throw ContractError("H3: mixture weights must sum to 1");
        if (outside > 1e-6) throw ContractError("H3: initial density mass outside the box exceeds 1e-6");
        for (std::size_t c = 0; c < rho.size(); ++c) {
            const Point p = grid.point(c);
            double v = 0.0;
            for (const auto& comp : params.components) {
                double r2 = 0.0;
                for (int k = 0; k < grid.dim; ++k) r2 += (p[k] - comp.mean[k]) * (p[k] - comp.mean[k]);
                const double norm = std::pow(2.0 * std::numbers::pi * comp.variance, -0.5 * grid.dim);
                v += comp.weight * norm * std::exp(-r2 / (2.0 * comp.variance));
            }
            rho[c] = v;
        }
    }

    const double mass = integrate(rho);
    if (!(mass > 0.0)) throw ContractError("H3: initial density has zero mass on the grid");
    rho *= 1.0 / mass;
    return rho;
}

// ---------------------------------------------------------------------------

namespace {

/// One explicit Euler sub-step of the conservative scheme, in place.
void forward_substep(ScalarField& rho, const CoefficientSample& coef, double h, std::vector<double>& flux,
                     std::vector<double>& qrho, std::vector<double>& update) {
    const GridSpec& g = rho.grid();
    const int n = g.cells;
    const double dx = g.dx();
    const std::size_t size = rho.size();
    for (std::size_t c = 0; c < size; ++c) qrho[c] = coef.q[c] * rho[c];

    std::fill(update.begin(), update.end(), 0.0);
    for (int k = 0; k < g.dim; ++k) {
        const auto& b = coef.drift.component(k);
        // flux[c] lives on the face between c and its +e_k neighbour
        for (std::size_t c = 0; c < size; ++c) {
            auto [ix, iy] = g.unflatten(c);
            if (k == 0) ix = ix + 1 == n ? 0 : ix + 1;
            else iy = iy + 1 == n ? 0 : iy + 1;
            const std::size_t r = g.flatten(ix, iy);
            flux[c] = -0.5 * (b[c] * rho[c] + b[r] * rho[r]) + (qrho[r] - qrho[c]) / (2.0 * dx);
        }
        for (std::size_t c = 0; c < size; ++c) {
            auto [ix, iy] = g.unflatten(c);
            if (k == 0) ix = ix == 0 ? n - 1 : ix - 1;
            else iy = iy == 0 ? n - 1 : iy - 1;
            update[c] += flux[c] - flux[g.flatten(ix, iy)];
        }
    }
    const double scale = h / dx;
    for (std::size_t c = 0; c < size; ++c) rho[c] += scale * update[c];
}

}  // namespace

DensityTrajectory solve_forward(const ScalarField& Su, const CoefficientModel& model, const ScalarField& rho0) {
    const GridSpec& g = Su.grid();
    if (!(rho0.grid() == g)) throw ContractError("forward: initial density grid mismatch");
    if (model.dim != g.dim) throw ContractError("forward: model dimension does not match grid");

    DensityTrajectory traj;
    traj.grid = g;
    traj.substeps = substeps_per_step(model, g);
    const double h = g.dt() / traj.substeps;
    traj.states.reserve(static_cast<std::size_t>(g.steps) + 1);
    traj.states.push_back(rho0);

    const double mass0 = integrate(rho0);
    traj.min_value = rho0.min();
    traj.max_boundary_mass = boundary_mass(rho0);

    ScalarField rho = rho0;
    std::vector<double> flux(rho.size()), qrho(rho.size()), update(rho.size());
    CoefficientSample coef;
    if (model.time_independent) coef = sample_coefficients(model, Su, 0.0);

    double prev_mass = mass0;
    for (int n = 0; n < g.steps; ++n) {
        for (int m = 0; m < traj.substeps; ++m) {
            const double t = g.time(n) + m * h;
            if (!model.time_independent) coef = sample_coefficients(model, Su, t);
            forward_substep(rho, coef, h, flux, qrho, update);
            if (!rho.all_finite()) {
                std::ostringstream msg;
                msg << "forward: non-finite density at step " << n << " sub-step " << m << " (t=" << t + h << ")";
                throw SolverError(msg.str());
            }
            const double mass = integrate(rho);
            traj.step_mass_drift = std::max(traj.step_mass_drift, std::abs(mass - prev_mass));
            prev_mass = mass;
        }
        const double peak = rho.max();
        const double low = rho.min();
        if (low < -1e-8 * peak) {
            std::ostringstream msg;
            msg << "forward: scheme failure, density " << low << " below -1e-8 * max at step " << n + 1;
            throw SolverError(msg.str());
        }
        traj.min_value = std::min(traj.min_value, low);
        traj.max_mass_drift = std::max(traj.max_mass_drift, std::abs(integrate(rho) - mass0));
        traj.max_boundary_mass = std::max(traj.max_boundary_mass, boundary_mass(rho));
        traj.states.push_back(rho);
    }

    if (traj.max_boundary_mass > 1e-6) {
        std::ostringstream msg;
        msg << "density mass near the box boundary reached " << traj.max_boundary_mass
            << " (> 1e-6); enlarge the domain";
        traj.warnings.push_back(msg.str());
    }
    if (traj.min_value < 0.0) {
        std::ostringstream msg;
        msg << "density undershoot " << traj.min_value << " (within scheme tolerance)";
        traj.warnings.push_back(msg.str());
    }
    return traj;
}

DensityTrajectory solve_forward(const ControlField& u, const NonlocalOperator& op,
                                const CoefficientModel& model, const ScalarField& rho0) {
    return solve_forward(op.apply(u), model, rho0);
}

}  // namespace nfpc
