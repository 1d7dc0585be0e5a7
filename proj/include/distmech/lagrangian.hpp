#pragma once

#include <map>
#include <string>
#include <vector>

#include "distmech/forms.hpp"
#include "distmech/integrate.hpp"

namespace distmech {

struct LagrangianModel {
    int n = 0;
    Connection N;
    Expr L;
    std::map<std::string, double> params;
};

/// Semispray components: X[i] along the horizontal basis, Xdot[i] along
/// d/dy^{i+1}. Xdot is an independent component list until integral-curve
/// substitution.
struct SemisprayField {
    int n = 0;
    std::vector<Expr> X, Xdot;
};

SemisprayField build_semispray(std::vector<Expr> X, std::vector<Expr> Xdot);

/// Symbolic atoms X1..Xn, Xdot1..Xdotn as independent parameters.
SemisprayField generic_semispray(int n);

AdaptedVectorField semispray_field(const SemisprayField& X);

/// C = F(X): -X^i d/dy^i + Xdot^i along the horizontal basis.
AdaptedVectorField liouville_field(const SemisprayField& X);

/// T - P with T = 1/2 sum m_i (y^i)^2 and P the given potential.
Expr build_TP_lagrangian(const std::vector<Expr>& masses, const Expr& potential);

/// Fundamental 2-form: -d(d_F L), computed through the forms pipeline.
AdaptedForm fundamental_form(const LagrangianModel& M);

/// E_L = C(L) - L = -X^i dL/dy^i + Xdot^i dL/dx^i_adapted - L.
Expr energy(const LagrangianModel& M, const SemisprayField& X);

/// i_X of the fundamental form.
AdaptedForm contract_fundamental(const SemisprayField& X, const LagrangianModel& M);

/// d(E_L) with the semispray components held constant.
AdaptedForm energy_differential(const LagrangianModel& M, const SemisprayField& X);

/// Euler-Lagrange residuals:
///   R1_i = d/dt(dL/dy^i) + dL/dx^i_adapted,
///   R2_i = d/dt(dL/dx^i_adapted) - dL/dy^i,
/// in the velocity atoms, plus the solved explicit flow when the linear
/// system in the velocity atoms is invertible (else residual-only with a
/// degeneracy diagnostic).
ODESystem el_residuals(const LagrangianModel& M);

/// Determinant-level regularity of the velocity Hessian d^2L/dy dy.
bool hessian_regular(const LagrangianModel& M);

struct CrosscheckReport {
    bool passed = true;
    std::vector<std::string> mismatches;
};

/// Verifies that i_X(fundamental form) - d(E_L) equals the expected
/// equation-of-motion 1-form coefficient by coefficient, and that the
/// integral-curve substitution collapses it to the Euler-Lagrange residuals.
CrosscheckReport derivation_crosscheck(const LagrangianModel& M);

}  // namespace distmech
