#pragma once

#include <vector>

#include "distmech/expr.hpp"

namespace distmech {

/// Which index of N[i][j] is summed in the adapted derivative. Under
/// `Paper`, the horizontal basis field for x^i subtracts N[i][j] * d/dy^j;
/// `Transposed` flips to N[j][i] (the more common convention).
enum class IndexConvention { Paper, Transposed };

/// Nonlinear connection: n x n matrix of symbolic coefficients.
struct Connection {
    int n = 0;
    std::vector<std::vector<Expr>> N;
    IndexConvention convention = IndexConvention::Paper;

    static Connection zero(int n);

    /// Coefficient multiplying d/dy^j inside the adapted derivative for x^i.
    /// Both i and j are 1-based coordinate indices.
    const Expr& coef(int i, int j) const {
        return convention == IndexConvention::Paper ? N[i - 1][j - 1] : N[j - 1][i - 1];
    }
    bool is_zero() const;
};

/// Adapted derivative: de/dx^i - sum_j N coef(i,j) * de/dy^j, i 1-based.
Expr adapted_dx(const Expr& e, int i, const Connection& N);

/// Vector field in the adapted frame: h[i] along the horizontal basis for
/// x^{i+1}, v[i] along d/dy^{i+1}.
struct AdaptedVectorField {
    int n = 0;
    std::vector<Expr> h, v;

    AdaptedVectorField() = default;
    AdaptedVectorField(std::vector<Expr> h_comp, std::vector<Expr> v_comp);
    static AdaptedVectorField zero(int n);

    AdaptedVectorField canonicalized() const;
    friend AdaptedVectorField operator+(const AdaptedVectorField& a, const AdaptedVectorField& b);
    friend AdaptedVectorField operator-(const AdaptedVectorField& a, const AdaptedVectorField& b);
    AdaptedVectorField operator-() const;
};

/// J, h, v, F act on vector fields; Jstar, Fstar act on 1-forms (see forms.hpp).
enum class FrameOp { J, Jstar, H, V, F, Fstar };

AdaptedVectorField apply_operator(FrameOp op, const AdaptedVectorField& X);

/// Componentwise structural equality of two fields.
bool field_equal(const AdaptedVectorField& a, const AdaptedVectorField& b);

/// The commutator [d/dx^i_adapted, d/dx^j_adapted] as a vector field
/// (purely vertical). i, j are 1-based.
AdaptedVectorField commutator_defect(const Connection& N, int i, int j);

}  // namespace distmech
