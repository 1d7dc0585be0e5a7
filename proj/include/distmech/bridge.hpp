#pragma once

#include <string>
#include <vector>

#include "distmech/hamiltonian.hpp"
#include "distmech/lagrangian.hpp"

namespace distmech {

/// Outcome of comparing the first-order Lagrangian flow against the
/// Hamiltonian flow obtained through the change of variables
/// q_i = dL/dx^i_adapted, p_i = dL/dy^i, H = -L.
struct BridgeReport {
    bool invertible = false;       // symbolic route: change of variables solved
    bool precondition_ok = false;  // trajectory route: input satisfies the EL residuals
    std::string error;             // nonempty: no verdicts were produced

    std::vector<std::string> equation_names;
    std::vector<bool> equal;            // symbolic verdict per equation
    std::vector<double> residual_max;   // trajectory max |residual| per equation
    double tolerance = 1e-6;

    bool passed() const;
};

/// Re-expresses H = -L through the (affine, invertible) change of variables
/// and compares the resulting Hamilton equations against the Euler-Lagrange
/// flow pushed through the same change, equation by equation.
/// `corrupt_hamiltonian_sign` flips H to +L (negative control).
BridgeReport bridge_check_symbolic(const LagrangianModel& M,
                                   bool corrupt_hamiltonian_sign = false);

/// Along a sampled Euler-Lagrange trajectory, checks by central differences
/// that the curves q(t), p(t) satisfy dp/dt = -q and dq/dt = p.
BridgeReport bridge_check_trajectory(const LagrangianModel& M, const Trajectory& traj,
                                     double tol = 1e-6);

}  // namespace distmech
