#include "distmech/lagrangian.hpp"

#include "distmech/symsolve.hpp"

namespace distmech {

SemisprayField build_semispray(std::vector<Expr> X, std::vector<Expr> Xdot) {
    if (X.size() != Xdot.size()) throw Error("semispray component count mismatch");
    SemisprayField s;
    s.n = int(X.size());
    s.X = std::move(X);
    s.Xdot = std::move(Xdot);
    return s;
}

SemisprayField generic_semispray(int n) {
    std::vector<Expr> X, Xdot;
    for (int i = 1; i <= n; ++i) {
        X.push_back(Expr::param("X" + std::to_string(i)));
        Xdot.push_back(Expr::param("Xdot" + std::to_string(i)));
    }
    return build_semispray(std::move(X), std::move(Xdot));
}

AdaptedVectorField semispray_field(const SemisprayField& X) {
    return AdaptedVectorField(X.X, X.Xdot);
}

AdaptedVectorField liouville_field(const SemisprayField& X) {
    return apply_operator(FrameOp::F, semispray_field(X));
}

Expr build_TP_lagrangian(const std::vector<Expr>& masses, const Expr& potential) {
    Expr T = Expr::zero();
    for (int i = 0; i < int(masses.size()); ++i)
        T = T + Expr::rational(1, 2) * masses[i] * Expr::pow(Expr::y(i + 1), Expr::integer(2));
    return canonicalize(T - potential);
}

AdaptedForm fundamental_form(const LagrangianModel& M) {
    return (-exterior_d(vertical_differential(M.L, M.N), M.N)).canonicalized();
}

Expr energy(const LagrangianModel& M, const SemisprayField& X) {
    Expr e = -M.L;
    for (int i = 1; i <= M.n; ++i) {
        e = e - X.X[i - 1] * differentiate(M.L, VarRef::y(i));
        e = e + X.Xdot[i - 1] * adapted_dx(M.L, i, M.N);
    }
    return canonicalize(e);
}

AdaptedForm contract_fundamental(const SemisprayField& X, const LagrangianModel& M) {
    return interior(semispray_field(X), fundamental_form(M)).canonicalized();
}

AdaptedForm energy_differential(const LagrangianModel& M, const SemisprayField& X) {
    // semispray components enter as parameter atoms, so d treats them as
    // constants automatically
    return exterior_d(AdaptedForm::scalar(M.n, energy(M, X)), M.N).canonicalized();
}

namespace {

std::vector<Expr> el_residual_exprs(const LagrangianModel& M) {
    std::vector<Expr> r1, r2;
    for (int i = 1; i <= M.n; ++i) {
        Expr Pi = differentiate(M.L, VarRef::y(i));
        Expr Qi = adapted_dx(M.L, i, M.N);
        r1.push_back(canonicalize(time_derivative(Pi, M.n) + Qi));
        r2.push_back(canonicalize(time_derivative(Qi, M.n) - Pi));
    }
    r1.insert(r1.end(), r2.begin(), r2.end());  // (R1_1..R1_n, R2_1..R2_n)
    return r1;
}

}  // namespace

ODESystem el_residuals(const LagrangianModel& M) {
    ODESystem sys;
    sys.n = M.n;
    sys.residuals = el_residual_exprs(M);

    // attempt the symbolic solve for the velocity atoms (xdot..., ydot...)
    const int dim = 2 * M.n;
    std::map<std::string, Expr> kill;
    for (int i = 1; i <= M.n; ++i) {
        kill["xdot" + std::to_string(i)] = Expr::zero();
        kill["ydot" + std::to_string(i)] = Expr::zero();
    }
    std::vector<std::vector<Expr>> A(dim, std::vector<Expr>(dim));
    std::vector<Expr> rhs(dim);
    bool linear = true;
    for (int r = 0; r < dim; ++r) {
        Expr r0 = substitute(sys.residuals[r], kill);
        for (int c = 0; c < dim; ++c) {
            std::string key = (c < M.n ? "xdot" : "ydot") + std::to_string((c % M.n) + 1);
            std::map<std::string, Expr> unit = kill;
            unit[key] = Expr::one();
            A[r][c] = canonicalize(substitute(sys.residuals[r], unit) - r0);
            for (const std::string& s : free_symbols(A[r][c]))
                if (s.rfind("xdot", 0) == 0 || s.rfind("ydot", 0) == 0) linear = false;
        }
        rhs[r] = canonicalize(-r0);
    }
    if (linear) {
        if (auto sol = solve_linear_symbolic(A, rhs)) {
            sys.kind = ODESystem::Kind::Explicit;
            sys.rhs = *sol;
            return sys;
        }
    }
    sys.kind = ODESystem::Kind::Residual;
    sys.diagnostic = "degenerate model: residuals cannot be solved for the velocities";
    return sys;
}

bool hessian_regular(const LagrangianModel& M) {
    std::vector<std::vector<Expr>> W(M.n, std::vector<Expr>(M.n));
    for (int i = 1; i <= M.n; ++i)
        for (int j = 1; j <= M.n; ++j)
            W[i - 1][j - 1] = differentiate(differentiate(M.L, VarRef::y(i)), VarRef::y(j));
    return invert_symbolic(W).has_value();
}

CrosscheckReport derivation_crosscheck(const LagrangianModel& M) {
    CrosscheckReport rep;
    const int n = M.n;
    SemisprayField Xg = generic_semispray(n);

    AdaptedForm lhs = (contract_fundamental(Xg, M) - energy_differential(M, Xg)).canonicalized();

    // Expected equation-of-motion 1-form: for each free index j,
    //   dx^j:  X^i (d/dx^i)_adapted P_j + Xdot^i dP_j/dy^i + Q_j
    //   dy^j: -X^i (d/dx^i)_adapted Q_j - Xdot^i dQ_j/dy^i + P_j
    // with P_j = dL/dy^j and Q_j = dL/dx^j_adapted.
    std::vector<Expr> P(n), Q(n);
    for (int j = 1; j <= n; ++j) {
        P[j - 1] = differentiate(M.L, VarRef::y(j));
        Q[j - 1] = adapted_dx(M.L, j, M.N);
    }
    std::vector<Expr> exp_dx(n), exp_dy(n);
    for (int j = 0; j < n; ++j) {
        Expr ax = Q[j];
        Expr ay = P[j];
        for (int i = 1; i <= n; ++i) {
            ax = ax + Xg.X[i - 1] * adapted_dx(P[j], i, M.N);
            ax = ax + Xg.Xdot[i - 1] * differentiate(P[j], VarRef::y(i));
            ay = ay - Xg.X[i - 1] * adapted_dx(Q[j], i, M.N);
            ay = ay - Xg.Xdot[i - 1] * differentiate(Q[j], VarRef::y(i));
        }
        exp_dx[j] = canonicalize(ax);
        exp_dy[j] = canonicalize(ay);
    }
    for (int j = 0; j < n; ++j) {
        if (!sym_equal(lhs.dx_coeffs()[j], exp_dx[j]).equal) {
            rep.passed = false;
            rep.mismatches.push_back("dx^" + std::to_string(j + 1) + " coefficient");
        }
        if (!sym_equal(lhs.dy_coeffs()[j], exp_dy[j]).equal) {
            rep.passed = false;
            rep.mismatches.push_back("dy^" + std::to_string(j + 1) + " coefficient");
        }
    }

    // Integral-curve substitution: X^i -> xdot^i and, consistently with the
    // adapted decomposition of the velocity, Xdot^k -> ydot^k + xdot^i N(i,k).
    std::map<std::string, Expr> sub;
    for (int i = 1; i <= n; ++i) sub["X" + std::to_string(i)] = velocity_atom(VarAxis::X, i);
    for (int k = 1; k <= n; ++k) {
        Expr v = velocity_atom(VarAxis::Y, k);
        for (int i = 1; i <= n; ++i)
            v = v + velocity_atom(VarAxis::X, i) * M.N.coef(i, k);
        sub["Xdot" + std::to_string(k)] = v;
    }
    std::vector<Expr> el = el_residual_exprs(M);  // R1_1..R1_n, R2_1..R2_n
    for (int j = 0; j < n; ++j) {
        Expr collapsed_dx = canonicalize(substitute(lhs.dx_coeffs()[j], sub));
        Expr collapsed_dy = canonicalize(substitute(lhs.dy_coeffs()[j], sub));
        if (!sym_equal(collapsed_dx, el[j]).equal) {
            rep.passed = false;
            rep.mismatches.push_back("integral-curve collapse of dx^" + std::to_string(j + 1) +
                                     " vs R1_" + std::to_string(j + 1));
        }
        if (!sym_equal(collapsed_dy, -el[n + j]).equal) {
            rep.passed = false;
            rep.mismatches.push_back("integral-curve collapse of dy^" + std::to_string(j + 1) +
                                     " vs -R2_" + std::to_string(j + 1));
        }
    }
    return rep;
}

}  // namespace distmech
