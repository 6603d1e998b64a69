#pragma once

#include <memory>
#include <string>
#include <vector>

#include "nfpc/adjoint.hpp"
#include "nfpc/cost.hpp"
#include "nfpc/forward.hpp"
#include "nfpc/nonlocal.hpp"

namespace nfpc {

/// Everything that defines one instance of the control problem.
struct ControlProblem {
    GridSpec grid;
    std::shared_ptr<const NonlocalOperator> op;
    OmegaPtr omega;
    double bound = 1.0;  ///< M0
    CoefficientModel model;
    CostSpec cost;
    ScalarField rho0;

    /// Runs every structural check (grid, omega, model on [0, sup Su], cost,
    /// initial density). Throws ContractError.
    void validate() const;
    /// Upper bound of s = Su over admissible controls.
    double s_max() const { return op->sup_bound(*omega, bound); }
};

struct CostBreakdown {
    double total = 0.0;
    double running = 0.0;
    double terminal = 0.0;
    double penalty = 0.0;
};

/// Trapezoid in time over the stored states for the running term.
CostBreakdown evaluate_cost(const ControlProblem& problem, const ControlField& u, const DensityTrajectory& rho);

/// Forward solve plus cost for one control.
struct StateEvaluation {
    ScalarField Su;
    DensityTrajectory rho;
    CostBreakdown cost;
};
StateEvaluation evaluate_state(const ControlProblem& problem, const ControlField& u);

/**
 * Phi = S*(A + B/2) with
 *   A = sum_k db_k/ds(x, Su) * int_0^T rho dp/dx_k dt,
 *   B = dq/ds(x, Su) * int_0^T rho Delta p dt,
 * time integrals by the trapezoid rule over the stored states.
 */
OmegaField switching_function(const ControlProblem& problem, const ScalarField& Su, const DensityTrajectory& rho,
                              const AdjointTrajectory& p);

/// argmin over [0, bound] of h(w) + w phi. Closed form for pure quadratic h,
/// ternary search to `resolution` otherwise (ties go to the smaller w).
double argmin_scalar(const Penalty& h, double phi, double bound, double resolution);
ControlField pointwise_argmin(const OmegaField& phi, const Penalty& h, double bound, double resolution);

struct SweepConfig {
    double relaxation = 0.5;
    int max_iter = 100;
    double tol_control = 1e-6;
    double tol_residual = 1e-6;
    /// Absolute argmin resolution; <= 0 selects 1e-4 * M0.
    double argmin_resolution = 0.0;
    int max_halvings = 5;

    void validate() const;
};

enum class Termination { residual, control_change, max_iter };
std::string to_string(Termination t);

struct SweepIteration {
    int index = 0;
    CostBreakdown cost;       ///< J(u_k)
    double residual = 0.0;    ///< ||u_k - argmin(Phi(u_k))||_{L2(omega)}
    double step_norm = 0.0;   ///< ||u_{k+1} - u_k||; 0 on the final row
    double relaxation = 0.0;  ///< lambda accepted for the step; 0 on the final row
    int halvings = 0;
    bool cost_increase = false;  ///< J rose even after the allowed halvings
};

struct SweepReport {
    ControlField initial;
    ControlField control;
    std::vector<SweepIteration> history;
    Termination reason = Termination::max_iter;
    int iterations = 0;  ///< control updates performed
    int total_halvings = 0;
    int monotonicity_violations = 0;
    CostBreakdown cost;
    double residual = 0.0;
    ScalarField Su;
    DensityTrajectory density;
    AdjointTrajectory adjoint;
    OmegaField switching;
};

/**
 * Relaxed forward-backward sweep u_{k+1} = (1 - lambda) u_k + lambda argmin(Phi(u_k)).
 * Lambda restarts from config.relaxation every iteration and is halved (at
 * most max_halvings times) while J increases. Stops when the residual drops
 * below tol_residual, when a step shorter than tol_control did not reach it,
 * or after max_iter updates. Solver errors are rethrown with the iteration.
 */
SweepReport fb_sweep(const ControlProblem& problem, const SweepConfig& config, const ControlField& u0);

struct DirectionalCheckRow {
    double eps = 0.0;
    double finite_difference = 0.0;
    double predicted = 0.0;
    double relative_mismatch = 0.0;
};

struct DirectionalCheckReport {
    double predicted = 0.0;  ///< <h'(u) + Phi(u), v>
    std::vector<DirectionalCheckRow> rows;
    /// log(m_i / m_{i+1}) / log(eps_i / eps_{i+1}) for consecutive rows.
    std::vector<double> observed_order;
};

/// Compares (J(u + eps v) - J(u)) / eps against <h'(u) + Phi(u), v>. Throws
/// ContractError if some u + eps v is inadmissible or h has no derivative.
DirectionalCheckReport directional_derivative_check(const ControlProblem& problem, const ControlField& u,
                                                    const OmegaField& direction, const std::vector<double>& eps);

}  // namespace nfpc
