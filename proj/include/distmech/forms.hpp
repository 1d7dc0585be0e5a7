#pragma once

#include <utility>
#include <vector>

#include "distmech/adapted.hpp"

namespace distmech {

/// Graded differential form (degree 0, 1 or 2) over the adapted coframe
/// {dx^i, dy^i_adapted}. Degree-2 storage:
///   A: dx^i ^ dx^j block, kept strictly upper-triangular (antisymmetric),
///   B: dx^i ^ dy^j block, full matrix,
///   C: dy^i ^ dy^j block, strictly upper-triangular.
class AdaptedForm {
public:
    static AdaptedForm scalar(int n, Expr s);
    static AdaptedForm one_form(std::vector<Expr> a, std::vector<Expr> b);
    static AdaptedForm zero(int n, int degree);

    int n() const { return n_; }
    int degree() const { return degree_; }

    const Expr& scalar_part() const;
    const std::vector<Expr>& dx_coeffs() const;   // deg 1
    const std::vector<Expr>& dy_coeffs() const;   // deg 1 (adapted dy)

    /// Mirrored reads, 0-based; A(i,i) == 0, A(i,j) == -A(j,i).
    Expr A(int i, int j) const;
    Expr B(int i, int j) const;
    Expr C(int i, int j) const;

    /// Accumulate coefficient * basis 2-form, 0-based indices.
    void add_dxdx(int i, int j, const Expr& c);
    void add_dxdy(int i, int j, const Expr& c);
    void add_dydy(int i, int j, const Expr& c);

    AdaptedForm canonicalized() const;

    friend AdaptedForm operator+(const AdaptedForm& f, const AdaptedForm& g);
    friend AdaptedForm operator-(const AdaptedForm& f, const AdaptedForm& g);
    AdaptedForm operator-() const;
    friend AdaptedForm operator*(const Expr& s, const AdaptedForm& f);

private:
    int n_ = 0;
    int degree_ = 0;
    Expr s_;
    std::vector<Expr> a_, b_;
    std::vector<std::vector<Expr>> A_, B_, C_;
};

/// Graded alternating product; result degree must stay <= 2.
AdaptedForm wedge(const AdaptedForm& f, const AdaptedForm& g);

/// Formal exterior derivative: coefficients are differentiated with the
/// adapted derivative (dx direction) and d/dy, the result wedged from the
/// left; basis coframe elements are treated as closed. Exact whenever
/// commutator_defect(N, i, j) vanishes for all i, j.
AdaptedForm exterior_d(const AdaptedForm& f, const Connection& N);

/// Interior product i_X, contracting in the first slot.
AdaptedForm interior(const AdaptedVectorField& X, const AdaptedForm& f);

/// Slot-by-slot substitution of F: i_F dx^i = dy^i, i_F dy^i = -dx^i.
AdaptedForm vertical_derivation(const AdaptedForm& f);

/// d_F e = i_F(d e) for scalars: -(de/dy^i) dx^i + (de/dx^i_adapted) dy^i.
AdaptedForm vertical_differential(const Expr& e, const Connection& N);

/// Jstar (natural-coframe dual of J) or Fstar (adapted-coframe almost
/// complex dual) applied to a degree-1 form.
AdaptedForm apply_costar(FrameOp op, const AdaptedForm& omega, const Connection& N);

/// Rewrite sum a_i dx^i + b_i dy^i (natural coframe) into the adapted coframe.
AdaptedForm to_adapted_coframe(const std::vector<Expr>& a, const std::vector<Expr>& b,
                               const Connection& N);

/// Inverse of to_adapted_coframe: natural (dx, dy) coefficients of a 1-form.
std::pair<std::vector<Expr>, std::vector<Expr>> to_natural_coframe(const AdaptedForm& f,
                                                                   const Connection& N);

/// Componentwise structural equality.
bool form_equal(const AdaptedForm& f, const AdaptedForm& g);

}  // namespace distmech
