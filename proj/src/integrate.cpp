#include "distmech/integrate.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "distmech/symsolve.hpp"

namespace distmech {

Expr velocity_atom(VarAxis axis, int i) {
    return Expr::param((axis == VarAxis::X ? "xdot" : "ydot") + std::to_string(i));
}

Expr time_derivative(const Expr& e, int n) {
    Expr out = differentiate(e, VarRef::t());
    for (int i = 1; i <= n; ++i) {
        out = out + velocity_atom(VarAxis::X, i) * differentiate(e, VarRef::x(i));
        out = out + velocity_atom(VarAxis::Y, i) * differentiate(e, VarRef::y(i));
    }
    return canonicalize(out);
}

std::vector<double> CompiledSystem::eval(double t, const std::vector<double>& state) const {
    return rhs_fn(t, state);
}
std::vector<double> CompiledSystem::eval_monitors(double t, const std::vector<double>& state) const {
    return monitor_fn ? monitor_fn(t, state) : std::vector<double>{};
}

namespace {

Point bind_point(int n, const std::map<std::string, double>& params) {
    Point p;
    p.n = n;
    for (const auto& [k, v] : params) p.vals[k] = v;
    return p;
}

void fill_state(Point& p, double t, const std::vector<double>& state, int n) {
    p.vals["t"] = t;
    for (int i = 0; i < n; ++i) {
        p.vals["x" + std::to_string(i + 1)] = state[i];
        p.vals["y" + std::to_string(i + 1)] = state[n + i];
    }
}

}  // namespace

CompiledSystem compile_system(const ODESystem& sys, const std::map<std::string, double>& params) {
    const int n = sys.n;
    Point base = bind_point(n, params);

    // check parameter coverage up front
    {
        std::set<std::string> needed;
        for (const Expr& e : sys.rhs)
            for (const std::string& s : free_symbols(e)) needed.insert(s);
        for (const Expr& e : sys.residuals)
            for (const std::string& s : free_symbols(e)) needed.insert(s);
        for (const auto& [name, e] : sys.monitors)
            for (const std::string& s : free_symbols(e)) needed.insert(s);
        for (const std::string& s : needed) {
            if (s == "t") continue;
            bool is_state = (s[0] == 'x' || s[0] == 'y') && s.size() > 1 &&
                            std::all_of(s.begin() + 1, s.end(),
                                        [](char c) { return std::isdigit((unsigned char)c); });
            bool is_vel = s.rfind("xdot", 0) == 0 || s.rfind("ydot", 0) == 0;
            bool is_atom = s.rfind("D(", 0) == 0;
            if (is_state || is_vel || is_atom) continue;
            if (!params.count(s)) throw Error("unbound parameter: " + s);
        }
    }

    CompiledSystem plan;
    plan.n = n;
    for (const auto& [name, e] : sys.monitors) plan.monitor_names.push_back(name);
    std::vector<Expr> monitor_exprs;
    for (const auto& [name, e] : sys.monitors) monitor_exprs.push_back(e);
    plan.monitor_fn = [n, base, monitor_exprs](double t, const std::vector<double>& state) {
        Point p = base;
        fill_state(p, t, state, n);
        std::vector<double> out;
        out.reserve(monitor_exprs.size());
        for (const Expr& e : monitor_exprs) out.push_back(evaluate(e, p));
        return out;
    };

    if (sys.kind == ODESystem::Kind::Explicit) {
        if (int(sys.rhs.size()) != 2 * n) throw Error("explicit system must have 2n right-hand sides");
        std::vector<Expr> rhs = sys.rhs;
        plan.rhs_fn = [n, base, rhs](double t, const std::vector<double>& state) {
            Point p = base;
            fill_state(p, t, state, n);
            std::vector<double> out(2 * n);
            for (int i = 0; i < 2 * n; ++i) out[i] = evaluate(rhs[i], p);
            return out;
        };
        return plan;
    }

    // Residual system: always linear in the velocity atoms (they enter via
    // the d/dt chain rule), so solve the 2n x 2n linear system numerically
    // per evaluation.
    if (int(sys.residuals.size()) != 2 * n) throw Error("residual system must have 2n residuals");
    std::vector<std::vector<Expr>> A(2 * n, std::vector<Expr>(2 * n));
    std::vector<Expr> r0(2 * n);
    std::map<std::string, Expr> kill_vel;
    for (int i = 1; i <= n; ++i) {
        kill_vel["xdot" + std::to_string(i)] = Expr::zero();
        kill_vel["ydot" + std::to_string(i)] = Expr::zero();
    }
    for (int r = 0; r < 2 * n; ++r) {
        for (int c = 0; c < 2 * n; ++c) {
            VarAxis axis = c < n ? VarAxis::X : VarAxis::Y;
            int idx = (c % n) + 1;
            std::string key = (axis == VarAxis::X ? "xdot" : "ydot") + std::to_string(idx);
            // residuals are affine in the velocity atoms (they enter through
            // the d/dt chain rule), so the coefficient is R|_{u_c=1} - R|_{u=0}
            std::map<std::string, Expr> unit = kill_vel;
            unit[key] = Expr::one();
            Expr coef = substitute(sys.residuals[r], unit) - substitute(sys.residuals[r], kill_vel);
            A[r][c] = canonicalize(coef);
        }
        r0[r] = canonicalize(substitute(sys.residuals[r], kill_vel));
    }

    // solvability probe at a generic state
    {
        Point p = base;
        std::vector<double> probe(2 * n);
        for (int i = 0; i < 2 * n; ++i) probe[i] = 0.537 + 0.211 * i;
        fill_state(p, 0.123, probe, n);
        std::vector<std::vector<double>> An(2 * n, std::vector<double>(2 * n));
        for (int r = 0; r < 2 * n; ++r)
            for (int c = 0; c < 2 * n; ++c) An[r][c] = evaluate(A[r][c], p);
        std::vector<double> dummy, rhsn(2 * n, 0.0);
        if (!solve_linear_numeric(An, rhsn, dummy))
            throw NumericError("unsolvable residual system: velocity matrix is singular" +
                               (sys.diagnostic.empty() ? "" : " (" + sys.diagnostic + ")"));
    }

    plan.rhs_fn = [n, base, A, r0](double t, const std::vector<double>& state) {
        Point p = base;
        fill_state(p, t, state, n);
        std::vector<std::vector<double>> An(2 * n, std::vector<double>(2 * n));
        std::vector<double> rn(2 * n);
        for (int r = 0; r < 2 * n; ++r) {
            for (int c = 0; c < 2 * n; ++c) An[r][c] = evaluate(A[r][c], p);
            rn[r] = -evaluate(r0[r], p);
        }
        std::vector<double> out;
        if (!solve_linear_numeric(An, rn, out))
            throw NumericError("residual solve became singular along the trajectory");
        return out;
    };
    return plan;
}

Trajectory integrate(const CompiledSystem& plan, std::vector<double> init, Method method,
                     double t0, double dt, int steps) {
    if (!(dt > 0)) throw Error("integrate: dt must be positive");
    if (steps < 1) throw Error("integrate: steps must be >= 1");
    if (int(init.size()) != 2 * plan.n) throw Error("integrate: init dimension mismatch");

    Trajectory traj;
    traj.t0 = t0;
    traj.dt = dt;
    traj.steps = steps;
    traj.method = method == Method::RK4 ? "rk4" : "midpoint";
    traj.monitor_names = plan.monitor_names;

    auto finite = [](const std::vector<double>& v) {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    };

    std::vector<double> s = std::move(init);
    double t = t0;
    auto record = [&](double tt, const std::vector<double>& st) {
        traj.t.push_back(tt);
        traj.state.push_back(st);
        traj.monitors.push_back(plan.eval_monitors(tt, st));
    };
    record(t, s);

    const int dim = 2 * plan.n;
    for (int k = 0; k < steps; ++k) {
        std::vector<double> next(dim);
        if (method == Method::RK4) {
            std::vector<double> k1 = plan.eval(t, s);
            std::vector<double> tmp(dim);
            for (int i = 0; i < dim; ++i) tmp[i] = s[i] + 0.5 * dt * k1[i];
            std::vector<double> k2 = plan.eval(t + 0.5 * dt, tmp);
            for (int i = 0; i < dim; ++i) tmp[i] = s[i] + 0.5 * dt * k2[i];
            std::vector<double> k3 = plan.eval(t + 0.5 * dt, tmp);
            for (int i = 0; i < dim; ++i) tmp[i] = s[i] + dt * k3[i];
            std::vector<double> k4 = plan.eval(t + dt, tmp);
            for (int i = 0; i < dim; ++i)
                next[i] = s[i] + dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
        } else {
            // implicit midpoint by fixed-point iteration on the midpoint state
            std::vector<double> mid = s;
            std::vector<double> prev(dim);
            bool converged = false;
            for (int it = 0; it < 50; ++it) {
                prev = mid;
                std::vector<double> f = plan.eval(t + 0.5 * dt, mid);
                double delta = 0;
                for (int i = 0; i < dim; ++i) {
                    double m = s[i] + 0.5 * dt * f[i];
                    delta = std::max(delta, std::abs(m - prev[i]));
                    mid[i] = m;
                }
                if (delta < 1e-13) {
                    converged = true;
                    break;
                }
            }
            if (!converged) throw NumericError("implicit midpoint fixed point did not converge");
            std::vector<double> f = plan.eval(t + 0.5 * dt, mid);
            for (int i = 0; i < dim; ++i) next[i] = s[i] + dt * f[i];
        }
        t = t0 + (k + 1) * dt;
        if (!finite(next)) {
            traj.aborted = true;
            traj.abort_reason = "non-finite state at t=" + std::to_string(t);
            return traj;
        }
        s = std::move(next);
        record(t, s);
    }
    return traj;
}

DriftReport measure_drift(const Trajectory& traj, const std::string& monitor) {
    int idx = -1;
    for (int i = 0; i < int(traj.monitor_names.size()); ++i)
        if (traj.monitor_names[i] == monitor) idx = i;
    if (idx < 0) throw Error("unknown monitor: " + monitor);

    DriftReport rep;
    rep.t = traj.t;
    rep.values.reserve(traj.monitors.size());
    for (const auto& row : traj.monitors) rep.values.push_back(row[idx]);

    // least-squares slope
    double n = double(rep.t.size());
    double st = 0, sv = 0, stt = 0, stv = 0;
    for (std::size_t i = 0; i < rep.t.size(); ++i) {
        st += rep.t[i];
        sv += rep.values[i];
        stt += rep.t[i] * rep.t[i];
        stv += rep.t[i] * rep.values[i];
    }
    double denom = n * stt - st * st;
    rep.slope = denom != 0 ? (n * stv - st * sv) / denom : 0.0;
    return rep;
}

std::vector<double> instantaneous_monitor_rate(const CompiledSystem& plan, const Trajectory& traj,
                                               const std::string& monitor) {
    int idx = -1;
    for (int i = 0; i < int(plan.monitor_names.size()); ++i)
        if (plan.monitor_names[i] == monitor) idx = i;
    if (idx < 0) throw Error("unknown monitor: " + monitor);

    std::vector<double> out;
    out.reserve(traj.t.size());
    const int dim = 2 * plan.n;
    for (std::size_t k = 0; k < traj.t.size(); ++k) {
        double t = traj.t[k];
        const std::vector<double>& s = traj.state[k];
        std::vector<double> f = plan.eval(t, s);
        double rate = 0;
        for (int i = 0; i < dim; ++i) {
            double h = 1e-6 * (1.0 + std::abs(s[i]));
            std::vector<double> sp = s, sm = s;
            sp[i] += h;
            sm[i] -= h;
            double dmi = (plan.eval_monitors(t, sp)[idx] - plan.eval_monitors(t, sm)[idx]) / (2 * h);
            rate += dmi * f[i];
        }
        out.push_back(rate);
    }
    return out;
}

}  // namespace distmech
