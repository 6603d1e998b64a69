#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nfpc/grid.hpp"
#include "nfpc/nonlocal.hpp"

namespace nfpc {

/**
 * Drift b(t, x, s) and isotropic volatility sigma(t, x, s) of the controlled
 * diffusion, with s = (Su)(x). The diffusion matrix is q * I with q = sigma^2.
 *
 * The s-derivatives are needed by the switching function; the declared bounds
 * feed the explicit-scheme time step and are checked on a sampling lattice by
 * validate_model().
 */
struct CoefficientModel {
    using VectorFn = std::function<Point(double t, const Point& x, double s)>;
    using ScalarFn = std::function<double(double t, const Point& x, double s)>;

    std::string name = "custom";
    int dim = 1;
    VectorFn drift;
    VectorFn drift_ds;
    ScalarFn sigma;
    ScalarFn q_ds;
    double gamma = 0.0;        ///< ellipticity: q >= gamma
    double drift_bound = 0.0;  ///< max |b_k|
    double q_bound = 0.0;      ///< max q
    bool time_independent = true;

    double q(double t, const Point& x, double s) const {
        const double v = sigma(t, x, s);
        return v * v;
    }
};

/// b = drift, q = q0, no s-dependence.
CoefficientModel constant_model(int dim, Point drift, double q0);

/**
 * Checks the structural hypotheses on a lattice of grid cells, times and
 * s in [0, s_max]: finiteness, |b_k| <= drift_bound, gamma <= q <= q_bound.
 * Throws ContractError naming the failed hypothesis and the sample.
 */
void validate_model(const CoefficientModel& model, const GridSpec& grid, double s_max);

struct CoefficientSample {
    VectorField drift;
    ScalarField q;
};

struct SensitivitySample {
    VectorField drift_ds;
    ScalarField q_ds;
};

/// Cell-wise evaluation with s = Su(x). Throws ModelError on non-finite output.
CoefficientSample sample_coefficients(const CoefficientModel& model, const ScalarField& Su, double t);
SensitivitySample sample_sensitivities(const CoefficientModel& model, const ScalarField& Su, double t);

/// 0.9 * min(dx^2 / (d q_max), dx / (2 b_max)), using the declared bounds.
double cfl_timestep(const CoefficientModel& model, const GridSpec& grid);
/// Number of explicit sub-steps per grid time step.
int substeps_per_step(const CoefficientModel& model, const GridSpec& grid);

// ---------------------------------------------------------------------------

enum class DensityPreset { gaussian, mixture, uniform };

struct GaussianComponent {
    double weight = 1.0;
    Point mean{};
    double variance = 0.04;  ///< per axis
};

struct InitialDensityParams {
    DensityPreset type = DensityPreset::gaussian;
    std::vector<GaussianComponent> components{GaussianComponent{}};
    Point lower{-0.5, -0.5};  ///< uniform box
    Point upper{0.5, 0.5};
};

/// Nonnegative, renormalised so that integrate() == 1. Throws ContractError
/// if more than 1e-6 of the analytic mass falls outside the box, if mixture
/// weights do not sum to 1, or if the uniform box leaves the domain.
ScalarField make_initial_density(const GridSpec& grid, const InitialDensityParams& params);

// ---------------------------------------------------------------------------

/// rho at the Nt+1 grid times.
struct DensityTrajectory {
    GridSpec grid;
    std::vector<ScalarField> states;
    int substeps = 1;                ///< explicit sub-steps per grid step
    double max_mass_drift = 0.0;     ///< max_n |integrate(rho^n) - integrate(rho^0)|
    double step_mass_drift = 0.0;    ///< max per-sub-step mass change
    double min_value = 0.0;
    double max_boundary_mass = 0.0;
    std::vector<std::string> warnings;

    const ScalarField& at(int n) const { return states.at(static_cast<std::size_t>(n)); }
    const ScalarField& final_state() const { return states.back(); }
};

/**
 * Explicit conservative finite-volume march of
 *   d rho/dt = -div(b rho) + 1/2 Delta(q rho)
 * with face flux J = -avg(b rho) + [(q rho)_+ - (q rho)_-] / (2 dx).
 *
 * Throws SolverError on a non-finite state or when rho drops below
 * -1e-8 * max rho.
 */
DensityTrajectory solve_forward(const ScalarField& Su, const CoefficientModel& model, const ScalarField& rho0);
DensityTrajectory solve_forward(const ControlField& u, const NonlocalOperator& op,
                                const CoefficientModel& model, const ScalarField& rho0);

}  // namespace nfpc
