#include "distmech/model_io.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace distmech {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

bool symbolically_zero(const Expr& e) { return sym_equal(e, Expr::zero()).equal; }

bool connection_defect_nonzero(const Connection& N) {
    for (int i = 1; i <= N.n; ++i) {
        for (int j = i + 1; j <= N.n; ++j) {
            AdaptedVectorField d = commutator_defect(N, i, j);
            for (const Expr& c : d.v)
                if (!symbolically_zero(c)) return true;
        }
    }
    return false;
}

ordered_json block_matrix(const AdaptedForm& f, char block) {
    ordered_json rows = ordered_json::array();
    for (int i = 0; i < f.n(); ++i) {
        ordered_json row = ordered_json::array();
        for (int j = 0; j < f.n(); ++j) {
            Expr e = block == 'A' ? f.A(i, j) : block == 'B' ? f.B(i, j) : f.C(i, j);
            row.push_back(to_string(canonicalize(e)));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

LagrangianModel ModelFile::lagrangian() const {
    if (side != Side::Lagrangian) throw SchemaError("model does not define a Lagrangian");
    return LagrangianModel{n, N, energy_expr, params};
}

HamiltonianModel ModelFile::hamiltonian() const {
    if (side != Side::Hamiltonian) throw SchemaError("model does not define a Hamiltonian");
    return HamiltonianModel{n, N, energy_expr, params};
}

ModelFile parse_model(const json& doc, IndexConvention convention) {
    if (!doc.is_object()) throw SchemaError("model file must be a JSON object");
    if (!doc.contains("n") || !doc["n"].is_number_integer())
        throw SchemaError("model file requires an integer field \"n\"");
    ModelFile M;
    M.n = doc["n"].get<int>();
    if (M.n < 1) throw SchemaError("\"n\" must be a positive integer");

    const bool has_l = doc.contains("lagrangian");
    const bool has_h = doc.contains("hamiltonian");
    if (has_l == has_h)
        throw SchemaError("model file must contain exactly one of \"lagrangian\" or \"hamiltonian\"");
    M.side = has_l ? Side::Lagrangian : Side::Hamiltonian;
    const json& energy = doc[has_l ? "lagrangian" : "hamiltonian"];
    if (!energy.is_string())
        throw SchemaError("the energy field must be an expression string");
    M.energy_expr = parse_expr(energy.get<std::string>(), M.n);

    M.N = Connection::zero(M.n);
    M.N.convention = convention;
    if (doc.contains("connection")) {
        const json& conn = doc["connection"];
        if (!conn.is_array() || static_cast<int>(conn.size()) != M.n)
            throw SchemaError("\"connection\" must be an n x n matrix of expression strings");
        for (int i = 0; i < M.n; ++i) {
            if (!conn[i].is_array() || static_cast<int>(conn[i].size()) != M.n)
                throw SchemaError("\"connection\" must be an n x n matrix of expression strings");
            for (int j = 0; j < M.n; ++j) {
                if (!conn[i][j].is_string())
                    throw SchemaError("connection entries must be expression strings");
                M.N.N[i][j] = parse_expr(conn[i][j].get<std::string>(), M.n);
            }
        }
    }

    if (doc.contains("params")) {
        const json& params = doc["params"];
        if (!params.is_object()) throw SchemaError("\"params\" must map names to numbers");
        for (auto it = params.begin(); it != params.end(); ++it) {
            if (!it.value().is_number())
                throw SchemaError("parameter \"" + it.key() + "\" must be a number");
            M.params[it.key()] = it.value().get<double>();
        }
    }
    if (doc.contains("labels")) M.labels = doc["labels"];
    return M;
}

ModelFile load_model(const std::string& path, IndexConvention convention) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open model file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("model file is not valid JSON: ") + e.what());
    }
    return parse_model(doc, convention);
}

ordered_json derive_document(const ModelFile& M) {
    ordered_json out;
    if (M.side == Side::Lagrangian) {
        LagrangianModel LM = M.lagrangian();
        ODESystem el = el_residuals(LM);
        AdaptedForm phi = fundamental_form(LM);

        // On-shell energy: the semispray atoms replaced by the velocity atoms
        // of an integral curve.
        SemisprayField X = generic_semispray(M.n);
        Expr E = energy(LM, X);
        std::map<std::string, Expr> on_shell;
        for (int i = 1; i <= M.n; ++i) {
            on_shell["X" + std::to_string(i)] = velocity_atom(VarAxis::X, i);
            Expr xd = velocity_atom(VarAxis::Y, i);
            for (int j = 1; j <= M.n; ++j)
                xd = xd + velocity_atom(VarAxis::X, j) * M.N.coef(j, i);
            on_shell["Xdot" + std::to_string(i)] = canonicalize(xd);
        }
        E = canonicalize(substitute(E, on_shell));

        out["side"] = "lagrangian";
        out["fundamental_form"] = {{"A", block_matrix(phi, 'A')},
                                   {"B", block_matrix(phi, 'B')},
                                   {"C", block_matrix(phi, 'C')}};
        out["energy"] = to_string(E);
        ordered_json res = ordered_json::array();
        for (const Expr& r : el.residuals) res.push_back(to_string(r));
        out["residuals"] = std::move(res);
        if (el.kind == ODESystem::Kind::Explicit) {
            ordered_json flow = ordered_json::array();
            for (const Expr& r : el.rhs) flow.push_back(to_string(r));
            out["explicit"] = std::move(flow);
        } else {
            out["explicit"] = nullptr;
        }
        out["diagnostics"] = {{"degenerate", el.kind == ODESystem::Kind::Residual},
                              {"commutator_defect_nonzero", connection_defect_nonzero(M.N)},
                              {"hessian_regular", hessian_regular(LM)}};
    } else {
        HamiltonianModel HM = M.hamiltonian();
        ODESystem ham = ham_residuals(HM);
        AdaptedForm phi = canonical_symplectic(M.n, M.N);

        out["side"] = "hamiltonian";
        out["fundamental_form"] = {{"A", block_matrix(phi, 'A')},
                                   {"B", block_matrix(phi, 'B')},
                                   {"C", block_matrix(phi, 'C')}};
        out["energy"] = to_string(canonicalize(HM.H));
        ordered_json res = ordered_json::array();
        for (const Expr& r : ham.residuals) res.push_back(to_string(r));
        out["residuals"] = std::move(res);
        ordered_json flow = ordered_json::array();
        for (const Expr& r : ham.rhs) flow.push_back(to_string(r));
        out["explicit"] = std::move(flow);
        // Fiber Hessian regularity of H, through the same determinant check.
        LagrangianModel fiber{M.n, M.N, HM.H, M.params};
        out["diagnostics"] = {{"degenerate", false},
                              {"commutator_defect_nonzero", connection_defect_nonzero(M.N)},
                              {"hessian_regular", hessian_regular(fiber)}};
    }
    return out;
}

std::vector<double> parse_init(const std::string& spec, int n) {
    std::vector<double> state(2 * n, 0.0);
    if (spec.empty()) return state;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos)
            throw SchemaError("init entry \"" + item + "\" is not of the form name=value");
        std::string name = item.substr(0, eq);
        std::string val = item.substr(eq + 1);
        // trim
        auto strip = [](std::string& s) {
            while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(0, 1);
            while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
        };
        strip(name);
        strip(val);
        if (name.size() < 2 || (name[0] != 'x' && name[0] != 'y'))
            throw SchemaError("init entry \"" + name + "\" is not a coordinate x1..xn, y1..yn");
        int idx = 0;
        try {
            size_t pos = 0;
            idx = std::stoi(name.substr(1), &pos);
            if (pos != name.size() - 1) idx = 0;
        } catch (...) {
            idx = 0;
        }
        if (idx < 1 || idx > n)
            throw SchemaError("init coordinate \"" + name + "\" is out of range for n=" +
                              std::to_string(n));
        char* end = nullptr;
        double v = std::strtod(val.c_str(), &end);
        if (end == val.c_str() || *end != '\0')
            throw SchemaError("init value \"" + val + "\" is not a number");
        state[(name[0] == 'x' ? 0 : n) + idx - 1] = v;
    }
    return state;
}

std::string trajectory_csv(const Trajectory& traj, int n) {
    std::string out = "t";
    for (int i = 1; i <= n; ++i) out += ",x" + std::to_string(i);
    for (int i = 1; i <= n; ++i) out += ",y" + std::to_string(i);
    for (const std::string& m : traj.monitor_names) out += "," + m;
    out += "\n";
    for (size_t s = 0; s < traj.t.size(); ++s) {
        out += fmt17(traj.t[s]);
        for (double v : traj.state[s]) out += "," + fmt17(v);
        if (s < traj.monitors.size())
            for (double v : traj.monitors[s]) out += "," + fmt17(v);
        out += "\n";
    }
    return out;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj, int n) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open output file: " + path);
    out << trajectory_csv(traj, n);
}

}  // namespace distmech
