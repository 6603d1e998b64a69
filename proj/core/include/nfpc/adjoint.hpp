#pragma once

#include <string>
#include <vector>

#include "nfpc/cost.hpp"
#include "nfpc/forward.hpp"

namespace nfpc {

/// p at the Nt+1 grid times; states.back() is G_T bit-for-bit.
struct AdjointTrajectory {
    GridSpec grid;
    std::vector<ScalarField> states;
    int substeps = 1;
    std::vector<std::string> warnings;

    const ScalarField& at(int n) const { return states.at(static_cast<std::size_t>(n)); }
};

/**
 * Backward march of the dual equation
 *   dp/dt = -b . grad p - 1/2 q Delta p - G,   p(T) = G_T,
 * written in reversed time tau = T - t and advanced by explicit Euler with
 * central differences. s = Su is frozen; G is sampled at the start of each
 * sub-step. Requires a time-independent model.
 */
AdjointTrajectory solve_adjoint(const ScalarField& Su, const CoefficientModel& model, const CostSpec& cost);
AdjointTrajectory solve_adjoint(const ControlField& u, const NonlocalOperator& op,
                                const CoefficientModel& model, const CostSpec& cost);

}  // namespace nfpc
