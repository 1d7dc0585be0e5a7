#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "distmech/expr.hpp"

namespace distmech {

/// Raised when integration cannot proceed (non-finite state, fixed-point
/// non-convergence, singular residual solve).
struct NumericError : Error {
    using Error::Error;
};

/// First-order equations of motion. State layout is (x1..xn, y1..yn).
/// Explicit systems carry 2n right-hand sides; residual systems carry 2n
/// residual expressions in the velocity atoms xdot1.., ydot1...
struct ODESystem {
    enum class Kind { Explicit, Residual };

    int n = 0;
    Kind kind = Kind::Explicit;
    std::vector<Expr> rhs;        // 2n entries when explicit
    std::vector<Expr> residuals;  // always populated (rhs-implied when explicit)
    std::vector<std::pair<std::string, Expr>> monitors;
    std::string diagnostic;  // nonempty for degenerate residual-only systems
};

/// Velocity atom for coordinate i (1-based): xdot<i> or ydot<i>.
Expr velocity_atom(VarAxis axis, int i);

/// d/dt through x1(t)..xn(t), y1(t)..yn(t) (and explicit t), introducing
/// velocity atoms.
Expr time_derivative(const Expr& e, int n);

struct Trajectory {
    double t0 = 0, dt = 0;
    int steps = 0;
    std::string method;
    std::vector<double> t;                      // steps+1 samples
    std::vector<std::vector<double>> state;     // per sample, 2n values
    std::vector<std::string> monitor_names;
    std::vector<std::vector<double>> monitors;  // per sample
    bool aborted = false;
    std::string abort_reason;
};

/// A parameter-bound evaluatable system.
class CompiledSystem {
public:
    int n = 0;
    std::vector<std::string> monitor_names;

    /// Derivative of the state at (t, state); state is (x..., y...).
    std::vector<double> eval(double t, const std::vector<double>& state) const;
    std::vector<double> eval_monitors(double t, const std::vector<double>& state) const;

    std::function<std::vector<double>(double, const std::vector<double>&)> rhs_fn;
    std::function<std::vector<double>(double, const std::vector<double>&)> monitor_fn;
};

/// Bind parameters and produce an evaluation plan. Residual systems are
/// solved per call as a linear system in the velocity atoms; throws
/// NumericError when that system is singular, Error on unbound parameters.
CompiledSystem compile_system(const ODESystem& sys, const std::map<std::string, double>& params);

enum class Method { RK4, ImplicitMidpoint };

/// Fixed-step integration. Implicit midpoint iterates to 1e-13 absolute on
/// state increments (max 50 sweeps). Aborts with a partial trajectory on
/// non-finite state.
Trajectory integrate(const CompiledSystem& plan, std::vector<double> init, Method method,
                     double t0, double dt, int steps);

struct DriftReport {
    std::vector<double> t;
    std::vector<double> values;
    double slope = 0;  // least-squares linear rate over the whole window
};

DriftReport measure_drift(const Trajectory& traj, const std::string& monitor);

/// Instantaneous monitor rate along the trajectory, measured numerically as
/// grad(monitor) . rhs with central differences in state space. Independent
/// of any symbolic drift formula.
std::vector<double> instantaneous_monitor_rate(const CompiledSystem& plan, const Trajectory& traj,
                                               const std::string& monitor);

}  // namespace distmech
