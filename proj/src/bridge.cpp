#include "distmech/bridge.hpp"

#include <cmath>

#include "distmech/symsolve.hpp"

namespace distmech {

bool BridgeReport::passed() const {
    if (!error.empty()) return false;
    for (bool v : equal)
        if (!v) return false;
    for (double r : residual_max)
        if (!(r <= tolerance)) return false;
    return !equation_names.empty();
}

namespace {

std::string coord_key(VarAxis axis, int i) {
    return (axis == VarAxis::X ? "x" : "y") + std::to_string(i);
}

// (q1..qn, p1..pn) as expressions in the original coordinates.
std::vector<Expr> momentum_map(const LagrangianModel& M) {
    std::vector<Expr> m;
    m.reserve(2 * M.n);
    for (int i = 1; i <= M.n; ++i) m.push_back(adapted_dx(M.L, i, M.N));
    for (int i = 1; i <= M.n; ++i)
        m.push_back(canonicalize(differentiate(M.L, VarRef::y(i))));
    return m;
}

Expr coord_by_flat_index(int n, int k) {  // k in [0, 2n)
    return k < n ? Expr::x(k + 1) : Expr::y(k - n + 1);
}

}  // namespace

BridgeReport bridge_check_symbolic(const LagrangianModel& M, bool corrupt_hamiltonian_sign) {
    BridgeReport rep;
    const int n = M.n;
    const int dim = 2 * n;
    std::vector<Expr> m = momentum_map(M);

    // Jacobian of (q, p) with respect to (x, y); the symbolic comparison is
    // only attempted for affine changes of variables.
    std::vector<std::vector<Expr>> J(dim, std::vector<Expr>(dim, Expr::zero()));
    for (int r = 0; r < dim; ++r) {
        for (int c = 0; c < dim; ++c) {
            VarRef w = c < n ? VarRef::x(c + 1) : VarRef::y(c - n + 1);
            J[r][c] = canonicalize(differentiate(m[r], w));
            for (const std::string& sym : free_symbols(J[r][c])) {
                if (sym.size() > 1 && (sym[0] == 'x' || sym[0] == 'y') &&
                    std::isdigit(static_cast<unsigned char>(sym[1]))) {
                    rep.error = "change of variables is not affine; symbolic comparison unsupported";
                    return rep;
                }
            }
        }
    }

    auto Jinv = invert_symbolic(J);
    if (!Jinv) {
        rep.error = "change of variables is not invertible";
        return rep;
    }
    rep.invertible = true;

    // Affine offset c_r = m_r at the origin.
    std::map<std::string, Expr> origin;
    for (int i = 1; i <= n; ++i) {
        origin[coord_key(VarAxis::X, i)] = Expr::zero();
        origin[coord_key(VarAxis::Y, i)] = Expr::zero();
    }
    std::vector<Expr> offset(dim);
    for (int r = 0; r < dim; ++r) offset[r] = canonicalize(substitute(m[r], origin));

    // Inverse map: old coordinate k = sum_r Jinv[k][r] (w_r - c_r), where the
    // new coordinates reuse the (x, y) channels as (q, p).
    std::map<std::string, Expr> inv;
    for (int k = 0; k < dim; ++k) {
        Expr acc = Expr::zero();
        for (int r = 0; r < dim; ++r)
            acc = acc + (*Jinv)[k][r] * (coord_by_flat_index(n, r) - offset[r]);
        std::string key = k < n ? coord_key(VarAxis::X, k + 1) : coord_key(VarAxis::Y, k - n + 1);
        inv[key] = canonicalize(acc);
    }

    Expr Lnew = canonicalize(substitute(M.L, inv));
    Expr H = canonicalize(corrupt_hamiltonian_sign ? Lnew : -Lnew);

    HamiltonianModel MH{n, Connection::zero(n), H, M.params};
    ODESystem ham = ham_residuals(MH);

    ODESystem el = el_residuals(M);
    if (el.kind != ODESystem::Kind::Explicit) {
        rep.error = "degenerate model: the Euler-Lagrange flow is not explicit";
        return rep;
    }

    // Push the Lagrangian flow through the change of variables: along
    // solutions, d/dt q_r = sum_c (dm_r/dw_c) wdot_c with wdot given by the
    // explicit flow, then re-expressed in (q, p).
    for (int r = 0; r < dim; ++r) {
        Expr rate = Expr::zero();
        for (int c = 0; c < dim; ++c) {
            VarRef w = c < n ? VarRef::x(c + 1) : VarRef::y(c - n + 1);
            rate = rate + differentiate(m[r], w) * el.rhs[c];
        }
        Expr lhs = canonicalize(substitute(canonicalize(rate), inv));
        rep.equation_names.push_back((r < n ? "qdot" : "pdot") +
                                     std::to_string(r < n ? r + 1 : r - n + 1));
        rep.equal.push_back(sym_equal(lhs, ham.rhs[r]).equal);
    }
    return rep;
}

BridgeReport bridge_check_trajectory(const LagrangianModel& M, const Trajectory& traj,
                                     double tol) {
    BridgeReport rep;
    rep.tolerance = tol;
    const int n = M.n;
    if (traj.t.size() < 3) {
        rep.error = "trajectory has too few samples for central differences";
        return rep;
    }
    const int samples = static_cast<int>(traj.t.size());
    const double dt = traj.dt;

    std::vector<Expr> m = momentum_map(M);
    ODESystem el = el_residuals(M);

    auto bind = [&](int s, const std::vector<double>& vel) {
        Point p(n, {});
        p.set("t", traj.t[s]);
        for (int i = 1; i <= n; ++i) {
            p.set(coord_key(VarAxis::X, i), traj.state[s][i - 1]);
            p.set(coord_key(VarAxis::Y, i), traj.state[s][n + i - 1]);
        }
        for (const auto& [k, v] : M.params) p.set(k, v);
        if (!vel.empty()) {
            for (int i = 1; i <= n; ++i) {
                p.set("xdot" + std::to_string(i), vel[i - 1]);
                p.set("ydot" + std::to_string(i), vel[n + i - 1]);
            }
        }
        return p;
    };

    // Precondition: the input trajectory satisfies the Euler-Lagrange
    // residuals with state velocities read off by central differences.
    double pre_max = 0;
    for (int s = 1; s + 1 < samples; ++s) {
        std::vector<double> vel(2 * n);
        for (int c = 0; c < 2 * n; ++c)
            vel[c] = (traj.state[s + 1][c] - traj.state[s - 1][c]) / (2 * dt);
        Point p = bind(s, vel);
        for (const Expr& R : el.residuals) pre_max = std::max(pre_max, std::abs(evaluate(R, p)));
    }
    if (!(pre_max <= tol)) {
        rep.error = "trajectory does not satisfy the Euler-Lagrange residuals (max " +
                    std::to_string(pre_max) + ")";
        return rep;
    }
    rep.precondition_ok = true;

    // Sample q(t), p(t) and difference the sampled curves directly.
    std::vector<std::vector<double>> qp(samples, std::vector<double>(2 * n));
    for (int s = 0; s < samples; ++s) {
        Point p = bind(s, {});
        for (int r = 0; r < 2 * n; ++r) qp[s][r] = evaluate(m[r], p);
    }
    rep.equation_names.resize(2 * n);
    rep.residual_max.assign(2 * n, 0.0);
    for (int i = 0; i < n; ++i) {
        rep.equation_names[i] = "qdot" + std::to_string(i + 1) + " - p" + std::to_string(i + 1);
        rep.equation_names[n + i] =
            "pdot" + std::to_string(i + 1) + " + q" + std::to_string(i + 1);
    }
    for (int s = 1; s + 1 < samples; ++s) {
        for (int i = 0; i < n; ++i) {
            double qdot = (qp[s + 1][i] - qp[s - 1][i]) / (2 * dt);
            double pdot = (qp[s + 1][n + i] - qp[s - 1][n + i]) / (2 * dt);
            rep.residual_max[i] = std::max(rep.residual_max[i], std::abs(qdot - qp[s][n + i]));
            rep.residual_max[n + i] =
                std::max(rep.residual_max[n + i], std::abs(pdot + qp[s][i]));
        }
    }
    return rep;
}

}  // namespace distmech
