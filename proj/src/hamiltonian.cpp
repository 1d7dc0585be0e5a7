#include "distmech/hamiltonian.hpp"

namespace distmech {

std::pair<AdaptedForm, AdaptedForm> liouville_one_form(int n) {
    if (n < 1) throw Error("liouville_one_form: n must be >= 1");
    std::vector<Expr> oa(n), ob(n), la(n), lb(n);
    Expr half = Expr::rational(1, 2);
    for (int i = 1; i <= n; ++i) {
        oa[i - 1] = half * Expr::x(i);
        ob[i - 1] = half * Expr::y(i);
        la[i - 1] = half * Expr::y(i);
        lb[i - 1] = -(half * Expr::x(i));
    }
    AdaptedForm omega = AdaptedForm::one_form(std::move(oa), std::move(ob));
    AdaptedForm lambda = AdaptedForm::one_form(std::move(la), std::move(lb));
    return {omega, lambda};
}

AdaptedForm canonical_symplectic(int n, const Connection& N) {
    (void)N;  // the symplectic blocks are connection-independent
    AdaptedForm out = AdaptedForm::zero(n, 2);
    for (int i = 0; i < n; ++i) out.add_dxdy(i, i, Expr::integer(-1));  // dy^i ^ dx^i
    return out;
}

AdaptedVectorField hamiltonian_vf(const HamiltonianModel& M) {
    std::vector<Expr> h(M.n), v(M.n);
    for (int i = 1; i <= M.n; ++i) {
        h[i - 1] = canonicalize(-differentiate(M.H, VarRef::y(i)));
        v[i - 1] = adapted_dx(M.H, i, M.N);
    }
    return AdaptedVectorField(std::move(h), std::move(v));
}

ODESystem ham_residuals(const HamiltonianModel& M) {
    ODESystem sys;
    sys.n = M.n;
    sys.kind = ODESystem::Kind::Explicit;
    AdaptedVectorField X = hamiltonian_vf(M);
    sys.rhs.reserve(2 * M.n);
    for (int i = 0; i < M.n; ++i) sys.rhs.push_back(X.h[i]);
    for (int i = 0; i < M.n; ++i) sys.rhs.push_back(X.v[i]);
    for (int i = 1; i <= M.n; ++i) {
        sys.residuals.push_back(
            canonicalize(velocity_atom(VarAxis::X, i) - X.h[i - 1]));
    }
    for (int i = 1; i <= M.n; ++i) {
        sys.residuals.push_back(
            canonicalize(velocity_atom(VarAxis::Y, i) - X.v[i - 1]));
    }
    sys.monitors.emplace_back("H", M.H);
    sys.monitors.emplace_back("Hdot_pred", energy_drift_rate(M));
    return sys;
}

Expr energy_drift_rate(const HamiltonianModel& M) {
    Expr rate = Expr::zero();
    for (int i = 1; i <= M.n; ++i)
        for (int j = 1; j <= M.n; ++j)
            rate = rate - differentiate(M.H, VarRef::y(i)) * M.N.coef(i, j) *
                              differentiate(M.H, VarRef::y(j));
    return canonicalize(rate);
}

}  // namespace distmech
