#pragma once

#include <map>
#include <string>
#include <utility>

#include "distmech/forms.hpp"
#include "distmech/integrate.hpp"

namespace distmech {

struct HamiltonianModel {
    int n = 0;
    Connection N;
    Expr H;
    std::map<std::string, double> params;
};

/// The Liouville form omega = 1/2 (x^i dx^i + y^i dy^i) and its almost
/// complex image lambda = 1/2 (-x^i dy^i + y^i dx^i), both as adapted
/// 1-forms. Returns {omega, lambda}.
std::pair<AdaptedForm, AdaptedForm> liouville_one_form(int n);

/// The symplectic 2-form dy^i ^ dx^i the Hamilton equations contract
/// against. See exterior_d for how this relates to -d(lambda).
AdaptedForm canonical_symplectic(int n, const Connection& N);

/// X_H = -(dH/dy^i) along the horizontal basis + (dH/dx^i_adapted) d/dy^i,
/// the unique solution of i_{X_H}(symplectic form) = dH.
AdaptedVectorField hamiltonian_vf(const HamiltonianModel& M);

/// Explicit flow dx^i/dt = -dH/dy^i, dy^i/dt = dH/dx^i_adapted, with
/// monitors "H" and "Hdot_pred" (the symbolic drift rate) attached.
ODESystem ham_residuals(const HamiltonianModel& M);

/// Symbolic dH/dt along the flow: -sum_{i,j} dH/dy^i N(i,j) dH/dy^j.
Expr energy_drift_rate(const HamiltonianModel& M);

}  // namespace distmech
