#include "distmech/symsolve.hpp"

#include <cmath>

namespace distmech {

std::optional<std::vector<Expr>> solve_linear_symbolic(std::vector<std::vector<Expr>> A,
                                                       std::vector<Expr> rhs) {
    const int m = int(A.size());
    if (m == 0) return std::vector<Expr>{};
    for (auto& row : A)
        for (Expr& e : row) e = canonicalize(e);
    for (Expr& e : rhs) e = canonicalize(e);

    std::vector<int> perm(m);
    for (int i = 0; i < m; ++i) perm[i] = i;

    for (int col = 0; col < m; ++col) {
        int pivot = -1;
        for (int r = col; r < m; ++r) {
            if (!sym_equal(A[r][col], Expr::zero()).equal) {
                pivot = r;
                break;
            }
        }
        if (pivot < 0) return std::nullopt;
        std::swap(A[col], A[pivot]);
        std::swap(rhs[col], rhs[pivot]);
        Expr inv = Expr::pow(A[col][col], Expr::integer(-1));
        for (int c = col; c < m; ++c) A[col][c] = canonicalize(A[col][c] * inv);
        rhs[col] = canonicalize(rhs[col] * inv);
        for (int r = 0; r < m; ++r) {
            if (r == col) continue;
            Expr factor = A[r][col];
            if (factor.is_zero()) continue;
            for (int c = col; c < m; ++c)
                A[r][c] = canonicalize(A[r][c] - factor * A[col][c]);
            rhs[r] = canonicalize(rhs[r] - factor * rhs[col]);
        }
    }
    return rhs;
}

std::optional<std::vector<std::vector<Expr>>> invert_symbolic(
    const std::vector<std::vector<Expr>>& A) {
    const int m = int(A.size());
    std::vector<std::vector<Expr>> inv(m, std::vector<Expr>(m, Expr::zero()));
    for (int col = 0; col < m; ++col) {
        std::vector<Expr> e(m, Expr::zero());
        e[col] = Expr::one();
        auto x = solve_linear_symbolic(A, e);
        if (!x) return std::nullopt;
        for (int r = 0; r < m; ++r) inv[r][col] = (*x)[r];
    }
    return inv;
}

bool solve_linear_numeric(std::vector<std::vector<double>> A, std::vector<double> rhs,
                          std::vector<double>& out) {
    const int m = int(A.size());
    for (int col = 0; col < m; ++col) {
        int pivot = col;
        for (int r = col + 1; r < m; ++r)
            if (std::abs(A[r][col]) > std::abs(A[pivot][col])) pivot = r;
        if (std::abs(A[pivot][col]) < 1e-12) return false;
        std::swap(A[col], A[pivot]);
        std::swap(rhs[col], rhs[pivot]);
        for (int r = 0; r < m; ++r) {
            if (r == col) continue;
            double f = A[r][col] / A[col][col];
            if (f == 0) continue;
            for (int c = col; c < m; ++c) A[r][c] -= f * A[col][c];
            rhs[r] -= f * rhs[col];
        }
    }
    out.resize(m);
    for (int i = 0; i < m; ++i) out[i] = rhs[i] / A[i][i];
    return true;
}

}  // namespace distmech
