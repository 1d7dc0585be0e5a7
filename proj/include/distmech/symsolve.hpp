#pragma once

#include <optional>
#include <vector>

#include "distmech/expr.hpp"

namespace distmech {

/// Solve A u = rhs by exact Gaussian elimination over expressions. Pivot
/// nonzero-ness is decided by sym_equal against 0. Returns nullopt when the
/// matrix is symbolically singular.
std::optional<std::vector<Expr>> solve_linear_symbolic(std::vector<std::vector<Expr>> A,
                                                       std::vector<Expr> rhs);

/// Matrix inverse via solve_linear_symbolic column by column.
std::optional<std::vector<std::vector<Expr>>> invert_symbolic(
    const std::vector<std::vector<Expr>>& A);

/// Numeric Gaussian elimination with partial pivoting; false when singular.
bool solve_linear_numeric(std::vector<std::vector<double>> A, std::vector<double> rhs,
                          std::vector<double>& out);

}  // namespace distmech
