// distmech: derive, simulate and check distribution-frame mechanics models.
//
// Exit codes: 0 success, 1 check failure, 2 usage/schema error, 3 numeric abort.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "distmech/model_io.hpp"
#include "distmech/symsolve.hpp"

namespace dm = distmech;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

dm::IndexConvention parse_convention(const std::string& s) {
    if (s == "paper") return dm::IndexConvention::Paper;
    if (s == "transposed") return dm::IndexConvention::Transposed;
    throw dm::SchemaError("--index-convention must be 'paper' or 'transposed'");
}

dm::Method parse_method(const std::string& s) {
    if (s == "rk4") return dm::Method::RK4;
    if (s == "midpoint") return dm::Method::ImplicitMidpoint;
    throw dm::SchemaError("--method must be 'rk4' or 'midpoint'");
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw dm::Error("cannot open output file: " + path);
    out << text;
}

int cmd_derive(const std::string& model_path, const std::string& side, const std::string& out,
               const std::string& convention) {
    dm::ModelFile M = dm::load_model(model_path, parse_convention(convention));
    if (side == "lagrangian" && M.side != dm::Side::Lagrangian)
        throw dm::SchemaError("--side lagrangian requested but the model defines a Hamiltonian");
    if (side == "hamiltonian" && M.side != dm::Side::Hamiltonian)
        throw dm::SchemaError("--side hamiltonian requested but the model defines a Lagrangian");
    nlohmann::ordered_json doc = dm::derive_document(M);
    write_text(out, doc.dump(2) + "\n");
    return kExitOk;
}

int cmd_simulate(const std::string& model_path, const std::string& init_spec, double t0,
                 double dt, int steps, const std::string& method, const std::string& out,
                 const std::string& convention, double assert_drift) {
    if (steps < 1) throw dm::SchemaError("--steps must be a positive integer");
    if (!(dt > 0)) throw dm::SchemaError("--dt must be positive");

    dm::ModelFile M = dm::load_model(model_path, parse_convention(convention));
    dm::ODESystem sys;
    if (M.side == dm::Side::Lagrangian) {
        sys = dm::el_residuals(M.lagrangian());
        if (sys.kind != dm::ODESystem::Kind::Explicit && !sys.diagnostic.empty())
            std::cerr << "note: " << sys.diagnostic << "\n";
    } else {
        sys = dm::ham_residuals(M.hamiltonian());
    }
    std::vector<double> init = dm::parse_init(init_spec, M.n);

    dm::CompiledSystem plan = dm::compile_system(sys, M.params);
    dm::Trajectory traj = dm::integrate(plan, init, parse_method(method), t0, dt, steps);
    dm::write_trajectory_csv(out.empty() ? "-" : out, traj, M.n);
    if (traj.aborted) {
        std::cerr << "numeric abort: " << traj.abort_reason << "\n";
        return kExitNumeric;
    }
    if (assert_drift >= 0 && !traj.monitor_names.empty()) {
        dm::DriftReport drift = dm::measure_drift(traj, traj.monitor_names.front());
        if (std::abs(drift.slope) > assert_drift) {
            std::cerr << "drift assertion failed: |" << traj.monitor_names.front()
                      << "| slope " << drift.slope << " exceeds " << assert_drift << "\n";
            return kExitCheckFailed;
        }
    }
    return kExitOk;
}

bool check_identities(int n, std::uint64_t seed, std::ostream& os) {
    // Generic field: every component an independent parameter symbol.
    std::vector<dm::Expr> h(n), v(n);
    for (int i = 0; i < n; ++i) {
        h[i] = dm::Expr::param("a" + std::to_string(i + 1));
        v[i] = dm::Expr::param("b" + std::to_string(i + 1));
    }
    dm::AdaptedVectorField X(h, v);
    auto apply2 = [&](dm::FrameOp op) {
        return dm::apply_operator(op, dm::apply_operator(op, X));
    };
    bool ok = true;
    auto verdict = [&](const std::string& name, bool pass) {
        os << (pass ? "pass" : "FAIL") << "  " << name << "\n";
        ok = ok && pass;
    };
    verdict("F^2 = -I", dm::field_equal(apply2(dm::FrameOp::F), -X));
    verdict("h + v = I",
            dm::field_equal(dm::apply_operator(dm::FrameOp::H, X) +
                                dm::apply_operator(dm::FrameOp::V, X),
                            X));
    verdict("h^2 = h", dm::field_equal(apply2(dm::FrameOp::H), dm::apply_operator(dm::FrameOp::H, X)));
    verdict("v^2 = v", dm::field_equal(apply2(dm::FrameOp::V), dm::apply_operator(dm::FrameOp::V, X)));
    verdict("hv = 0", dm::field_equal(dm::apply_operator(dm::FrameOp::H, dm::apply_operator(dm::FrameOp::V, X)),
                                      dm::AdaptedVectorField::zero(n)));
    verdict("vh = 0", dm::field_equal(dm::apply_operator(dm::FrameOp::V, dm::apply_operator(dm::FrameOp::H, X)),
                                      dm::AdaptedVectorField::zero(n)));
    verdict("J^2 = 0", dm::field_equal(apply2(dm::FrameOp::J), dm::AdaptedVectorField::zero(n)));

    // Coframe side on a generic 1-form, via the almost complex dual.
    std::vector<dm::Expr> a(n), b(n);
    for (int i = 0; i < n; ++i) {
        a[i] = dm::Expr::param("c" + std::to_string(i + 1));
        b[i] = dm::Expr::param("d" + std::to_string(i + 1));
    }
    dm::AdaptedForm omega = dm::AdaptedForm::one_form(a, b);
    dm::Connection N = dm::Connection::zero(n);
    dm::AdaptedForm ffo =
        dm::apply_costar(dm::FrameOp::Fstar, dm::apply_costar(dm::FrameOp::Fstar, omega, N), N);
    verdict("F*^2 = -I", dm::form_equal(ffo, -omega));
    (void)seed;
    return ok;
}

bool check_bridge(const std::string& model_path, const std::string& convention, std::ostream& os,
                  int& exit_code) {
    dm::ModelFile M = dm::load_model(model_path, parse_convention(convention));
    if (M.side != dm::Side::Lagrangian)
        throw dm::SchemaError("check bridge requires a Lagrangian model");
    dm::BridgeReport rep = dm::bridge_check_symbolic(M.lagrangian());
    if (!rep.invertible) {
        os << "bridge: change of variables not invertible — no verdict\n";
        os << "  " << rep.error << "\n";
        exit_code = kExitUsage;
        return false;
    }
    for (size_t i = 0; i < rep.equation_names.size(); ++i)
        os << (rep.equal[i] ? "pass" : "FAIL") << "  " << rep.equation_names[i] << "\n";
    return rep.passed();
}

bool check_drift(const std::string& model_path, const std::string& convention, std::ostream& os) {
    dm::ModelFile M = dm::load_model(model_path, parse_convention(convention));
    if (M.side != dm::Side::Hamiltonian)
        throw dm::SchemaError("check drift requires a Hamiltonian model");
    dm::HamiltonianModel HM = M.hamiltonian();
    dm::ODESystem sys = dm::ham_residuals(HM);
    dm::CompiledSystem plan = dm::compile_system(sys, M.params);
    std::vector<double> init(2 * M.n, 0.0);
    init[0] = 1.0;
    dm::Trajectory traj = dm::integrate(plan, init, dm::Method::RK4, 0.0, 1e-3, 2000);
    std::vector<double> measured = dm::instantaneous_monitor_rate(plan, traj, "H");
    double worst = 0;
    for (size_t s = 0; s < traj.t.size(); ++s) {
        double predicted = traj.monitors[s][1];  // Hdot_pred
        worst = std::max(worst, std::abs(measured[s] - predicted));
    }
    os << "drift: max |measured dH/dt - predicted| = " << worst << "\n";
    return worst < 1e-6;
}

bool check_crossderivation(int n, std::ostream& os) {
    dm::LagrangianModel M;
    M.n = n;
    M.N = dm::Connection::zero(n);
    M.L = dm::Expr::opaque("L", n);
    dm::CrosscheckReport rep = dm::derivation_crosscheck(M);
    if (!rep.passed)
        for (const std::string& m : rep.mismatches) os << "  mismatch: " << m << "\n";
    os << (rep.passed ? "pass" : "FAIL") << "  contraction route matches direct residuals (n="
       << n << ")\n";
    return rep.passed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adapted-frame mechanics workbench: derive equations of motion, "
                 "integrate them, and check structural identities."};
    app.require_subcommand(1);

    std::string model_path, side = "auto", out_path, init_spec, method = "rk4";
    std::string convention = "paper", suite;
    double t0 = 0, dt = 1e-3, assert_drift = -1;
    int steps = 1000, n = 2;
    std::uint64_t seed = 0x5eed;
    bool classical = false;

    CLI::App* derive = app.add_subcommand("derive", "Derive the equations-of-motion document");
    derive->add_option("--model", model_path, "model JSON file")->required();
    derive->add_option("--side", side, "auto|lagrangian|hamiltonian");
    derive->add_option("--out", out_path, "output path ('-' for stdout)");
    derive->add_option("--index-convention", convention, "paper|transposed");

    CLI::App* simulate = app.add_subcommand("simulate", "Integrate a model and write a CSV trajectory");
    simulate->add_option("--model", model_path, "model JSON file")->required();
    simulate->add_option("--init", init_spec, "initial state, e.g. x1=1,y1=0");
    simulate->add_option("--t0", t0, "start time");
    simulate->add_option("--dt", dt, "step size");
    simulate->add_option("--steps", steps, "step count");
    simulate->add_option("--method", method, "rk4|midpoint");
    simulate->add_option("--out", out_path, "output CSV path ('-' for stdout)");
    simulate->add_option("--index-convention", convention, "paper|transposed");
    simulate->add_option("--assert-drift", assert_drift, "fail if |monitor slope| exceeds this");

    CLI::App* check = app.add_subcommand("check", "Run a verification suite");
    check->add_option("suite", suite, "identities|bridge|drift|crossderivation")->required();
    check->add_option("--model", model_path, "model JSON file");
    check->add_option("--n", n, "dimension for model-free suites");
    check->add_option("--seed", seed, "random seed");
    check->add_option("--index-convention", convention, "paper|transposed");
    check->add_flag("--classical", classical, "also print the transposed-convention comparison");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (derive->parsed()) {
            if (side != "auto" && side != "lagrangian" && side != "hamiltonian")
                throw dm::SchemaError("--side must be auto, lagrangian or hamiltonian");
            return cmd_derive(model_path, side, out_path, convention);
        }
        if (simulate->parsed()) {
            return cmd_simulate(model_path, init_spec, t0, dt, steps, method, out_path,
                                convention, assert_drift);
        }
        // check
        bool ok = false;
        int exit_code = kExitCheckFailed;
        if (suite == "identities") {
            ok = true;
            for (int dim = 1; dim <= n; ++dim) ok = check_identities(dim, seed, std::cout) && ok;
            if (classical)
                std::cout << "note: identities are convention-independent; the transposed "
                             "convention permutes only which connection entry each basis "
                             "field reads.\n";
        } else if (suite == "bridge") {
            if (model_path.empty()) throw dm::SchemaError("check bridge requires --model");
            ok = check_bridge(model_path, convention, std::cout, exit_code);
            if (!ok) return exit_code;
        } else if (suite == "drift") {
            if (model_path.empty()) throw dm::SchemaError("check drift requires --model");
            ok = check_drift(model_path, convention, std::cout);
        } else if (suite == "crossderivation") {
            ok = true;
            for (int dim = 1; dim <= n && dim <= 3; ++dim)
                ok = check_crossderivation(dim, std::cout) && ok;
        } else {
            throw dm::SchemaError("unknown check suite: " + suite);
        }
        std::cout << (ok ? "all checks passed" : "checks FAILED") << "\n";
        return ok ? kExitOk : kExitCheckFailed;
    } catch (const dm::SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const dm::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const dm::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const dm::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}
