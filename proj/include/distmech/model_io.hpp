#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "distmech/bridge.hpp"
#include "distmech/hamiltonian.hpp"
#include "distmech/lagrangian.hpp"

namespace distmech {

/// Input file or flag violates the documented schema / usage rules.
struct SchemaError : Error {
    using Error::Error;
};

enum class Side { Lagrangian, Hamiltonian };

/// Parsed model file: dimension, connection coefficients, exactly one of a
/// Lagrangian or Hamiltonian energy expression, numeric parameter bindings.
struct ModelFile {
    int n = 0;
    Connection N;
    Side side = Side::Lagrangian;
    Expr energy_expr;  // L or H depending on side
    std::map<std::string, double> params;
    nlohmann::ordered_json labels;  // passthrough, may be null

    LagrangianModel lagrangian() const;
    HamiltonianModel hamiltonian() const;
};

ModelFile parse_model(const nlohmann::json& doc,
                      IndexConvention convention = IndexConvention::Paper);
ModelFile load_model(const std::string& path,
                     IndexConvention convention = IndexConvention::Paper);

/// Derived-equations document with keys side, fundamental_form (string
/// matrices A/B/C), energy, residuals, explicit (null when unavailable),
/// diagnostics. Deterministic field order and formatting.
nlohmann::ordered_json derive_document(const ModelFile& M);

/// Parse "x1=1,y1=0" into the (x1..xn, y1..yn) state vector; unassigned
/// entries are zero. Unknown or out-of-range names raise SchemaError.
std::vector<double> parse_init(const std::string& spec, int n);

/// CSV with header t,x1..xn,y1..yn,<monitor names>, 17 significant digits.
std::string trajectory_csv(const Trajectory& traj, int n);
void write_trajectory_csv(const std::string& path, const Trajectory& traj, int n);

}  // namespace distmech
