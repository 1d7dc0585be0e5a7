#include "distmech/forms.hpp"

namespace distmech {

AdaptedForm AdaptedForm::scalar(int n, Expr s) {
    AdaptedForm f;
    f.n_ = n;
    f.degree_ = 0;
    f.s_ = std::move(s);
    return f;
}

AdaptedForm AdaptedForm::one_form(std::vector<Expr> a, std::vector<Expr> b) {
    if (a.size() != b.size()) throw Error("one_form: coefficient count mismatch");
    AdaptedForm f;
    f.n_ = int(a.size());
    f.degree_ = 1;
    f.a_ = std::move(a);
    f.b_ = std::move(b);
    return f;
}

AdaptedForm AdaptedForm::zero(int n, int degree) {
    AdaptedForm f;
    f.n_ = n;
    f.degree_ = degree;
    switch (degree) {
        case 0:
            f.s_ = Expr::zero();
            break;
        case 1:
            f.a_.assign(n, Expr::zero());
            f.b_.assign(n, Expr::zero());
            break;
        case 2:
            f.A_.assign(n, std::vector<Expr>(n, Expr::zero()));
            f.B_.assign(n, std::vector<Expr>(n, Expr::zero()));
            f.C_.assign(n, std::vector<Expr>(n, Expr::zero()));
            break;
        default:
            throw Error("forms of degree > 2 are unsupported");
    }
    return f;
}

const Expr& AdaptedForm::scalar_part() const {
    if (degree_ != 0) throw Error("scalar_part: not a 0-form");
    return s_;
}
const std::vector<Expr>& AdaptedForm::dx_coeffs() const {
    if (degree_ != 1) throw Error("dx_coeffs: not a 1-form");
    return a_;
}
const std::vector<Expr>& AdaptedForm::dy_coeffs() const {
    if (degree_ != 1) throw Error("dy_coeffs: not a 1-form");
    return b_;
}

Expr AdaptedForm::A(int i, int j) const {
    if (i == j) return Expr::zero();
    return i < j ? A_[i][j] : -A_[j][i];
}
Expr AdaptedForm::B(int i, int j) const { return B_[i][j]; }
Expr AdaptedForm::C(int i, int j) const {
    if (i == j) return Expr::zero();
    return i < j ? C_[i][j] : -C_[j][i];
}

void AdaptedForm::add_dxdx(int i, int j, const Expr& c) {
    if (i == j) return;
    if (i < j)
        A_[i][j] = A_[i][j] + c;
    else
        A_[j][i] = A_[j][i] - c;
}
void AdaptedForm::add_dxdy(int i, int j, const Expr& c) { B_[i][j] = B_[i][j] + c; }
void AdaptedForm::add_dydy(int i, int j, const Expr& c) {
    if (i == j) return;
    if (i < j)
        C_[i][j] = C_[i][j] + c;
    else
        C_[j][i] = C_[j][i] - c;
}

AdaptedForm AdaptedForm::canonicalized() const {
    AdaptedForm out = *this;
    auto cn = [](Expr& e) { e = canonicalize(e); };
    cn(out.s_);
    for (Expr& e : out.a_) cn(e);
    for (Expr& e : out.b_) cn(e);
    for (auto* m : {&out.A_, &out.B_, &out.C_})
        for (auto& row : *m)
            for (Expr& e : row) cn(e);
    return out;
}

AdaptedForm operator+(const AdaptedForm& f, const AdaptedForm& g) {
    if (f.n_ != g.n_ || f.degree_ != g.degree_) throw Error("form addition: shape mismatch");
    AdaptedForm out = f;
    out.s_ = f.s_ + g.s_;
    for (std::size_t i = 0; i < out.a_.size(); ++i) {
        out.a_[i] = f.a_[i] + g.a_[i];
        out.b_[i] = f.b_[i] + g.b_[i];
    }
    for (int i = 0; i < int(out.A_.size()); ++i)
        for (int j = 0; j < int(out.A_.size()); ++j) {
            out.A_[i][j] = f.A_[i][j] + g.A_[i][j];
            out.B_[i][j] = f.B_[i][j] + g.B_[i][j];
            out.C_[i][j] = f.C_[i][j] + g.C_[i][j];
        }
    return out;
}

AdaptedForm operator-(const AdaptedForm& f, const AdaptedForm& g) { return f + (-g); }

AdaptedForm AdaptedForm::operator-() const { return Expr::integer(-1) * *this; }

AdaptedForm operator*(const Expr& s, const AdaptedForm& f) {
    AdaptedForm out = f;
    out.s_ = s * f.s_;
    for (std::size_t i = 0; i < out.a_.size(); ++i) {
        out.a_[i] = s * f.a_[i];
        out.b_[i] = s * f.b_[i];
    }
    for (int i = 0; i < int(out.A_.size()); ++i)
        for (int j = 0; j < int(out.A_.size()); ++j) {
            out.A_[i][j] = s * f.A_[i][j];
            out.B_[i][j] = s * f.B_[i][j];
            out.C_[i][j] = s * f.C_[i][j];
        }
    return out;
}

AdaptedForm wedge(const AdaptedForm& f, const AdaptedForm& g) {
    if (f.n() != g.n()) throw Error("wedge: dimension mismatch");
    int df = f.degree(), dg = g.degree();
    if (df + dg > 2) throw Error("wedge: degree overflow");
    if (df == 0) return f.scalar_part() * g;
    if (dg == 0) return g.scalar_part() * f;
    // 1 x 1
    int n = f.n();
    AdaptedForm out = AdaptedForm::zero(n, 2);
    const auto& a = f.dx_coeffs();
    const auto& b = f.dy_coeffs();
    const auto& c = g.dx_coeffs();
    const auto& d = g.dy_coeffs();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            out.add_dxdx(i, j, a[i] * c[j]);
            out.add_dxdy(i, j, a[i] * d[j]);
            out.add_dxdy(j, i, -(b[i] * c[j]));  // dy^i ^ dx^j = -dx^j ^ dy^i
            out.add_dydy(i, j, b[i] * d[j]);
        }
    return out;
}

AdaptedForm exterior_d(const AdaptedForm& f, const Connection& N) {
    int n = f.n();
    if (f.degree() == 0) {
        std::vector<Expr> a(n), b(n);
        for (int j = 1; j <= n; ++j) {
            a[j - 1] = adapted_dx(f.scalar_part(), j, N);
            b[j - 1] = differentiate(f.scalar_part(), VarRef::y(j));
        }
        return AdaptedForm::one_form(std::move(a), std::move(b));
    }
    if (f.degree() != 1) throw Error("exterior_d: degree overflow");
    AdaptedForm out = AdaptedForm::zero(n, 2);
    for (int i = 0; i < n; ++i) {
        const Expr& ai = f.dx_coeffs()[i];
        const Expr& bi = f.dy_coeffs()[i];
        for (int j = 0; j < n; ++j) {
            Expr dx_ai = adapted_dx(ai, j + 1, N);
            Expr dy_ai = differentiate(ai, VarRef::y(j + 1));
            Expr dx_bi = adapted_dx(bi, j + 1, N);
            Expr dy_bi = differentiate(bi, VarRef::y(j + 1));
            out.add_dxdx(j, i, dx_ai);          // dx^j ^ dx^i
            out.add_dxdy(i, j, -dy_ai);         // dy^j ^ dx^i
            out.add_dxdy(j, i, dx_bi);          // dx^j ^ dy^i
            out.add_dydy(j, i, dy_bi);          // dy^j ^ dy^i
        }
    }
    return out;
}

AdaptedForm interior(const AdaptedVectorField& X, const AdaptedForm& f) {
    int n = f.n();
    if (X.n != n) throw Error("interior: dimension mismatch");
    if (f.degree() == 0) throw Error("interior: degree underflow");
    if (f.degree() == 1) {
        Expr s = Expr::zero();
        for (int i = 0; i < n; ++i)
            s = s + X.h[i] * f.dx_coeffs()[i] + X.v[i] * f.dy_coeffs()[i];
        return AdaptedForm::scalar(n, s);
    }
    std::vector<Expr> a(n, Expr::zero()), b(n, Expr::zero());
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            Expr cA = f.A(i, j);  // dx^i ^ dx^j
            a[j] = a[j] + cA * X.h[i];
            a[i] = a[i] - cA * X.h[j];
            Expr cC = f.C(i, j);  // dy^i ^ dy^j
            b[j] = b[j] + cC * X.v[i];
            b[i] = b[i] - cC * X.v[j];
        }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Expr cB = f.B(i, j);  // dx^i ^ dy^j
            b[j] = b[j] + cB * X.h[i];
            a[i] = a[i] - cB * X.v[j];
        }
    return AdaptedForm::one_form(std::move(a), std::move(b));
}

AdaptedForm vertical_derivation(const AdaptedForm& f) {
    int n = f.n();
    if (f.degree() == 0) return AdaptedForm::scalar(n, Expr::zero());
    if (f.degree() == 1) {
        // i_F dx^i = dy^i, i_F dy^i = -dx^i
        std::vector<Expr> a(n), b(n);
        for (int i = 0; i < n; ++i) {
            a[i] = -f.dy_coeffs()[i];
            b[i] = f.dx_coeffs()[i];
        }
        return AdaptedForm::one_form(std::move(a), std::move(b));
    }
    AdaptedForm out = AdaptedForm::zero(n, 2);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            Expr cA = f.A(i, j);  // dx^i^dx^j -> dy^i^dx^j + dx^i^dy^j
            out.add_dxdy(j, i, -cA);
            out.add_dxdy(i, j, cA);
            Expr cC = f.C(i, j);  // dy^i^dy^j -> -dx^i^dy^j - dy^i^dx^j
            out.add_dxdy(i, j, -cC);
            out.add_dxdy(j, i, cC);
        }
        for (int j = 0; j < n; ++j) {
            Expr cB = f.B(i, j);  // dx^i^dy^j -> dy^i^dy^j - dx^i^dx^j
            out.add_dydy(i, j, cB);
            out.add_dxdx(i, j, -cB);
        }
    }
    return out;
}

AdaptedForm vertical_differential(const Expr& e, const Connection& N) {
    return vertical_derivation(exterior_d(AdaptedForm::scalar(N.n, e), N));
}

AdaptedForm apply_costar(FrameOp op, const AdaptedForm& omega, const Connection& N) {
    if (omega.degree() != 1) throw Error("apply_costar: expects a 1-form");
    int n = omega.n();
    if (op == FrameOp::Fstar) {
        // Fstar(dx^i) = -dy^i, Fstar(dy^i) = dx^i (adapted coframe)
        std::vector<Expr> a(n), b(n);
        for (int i = 0; i < n; ++i) {
            a[i] = omega.dy_coeffs()[i];
            b[i] = -omega.dx_coeffs()[i];
        }
        return AdaptedForm::one_form(std::move(a), std::move(b));
    }
    if (op == FrameOp::Jstar) {
        // Jstar(dx^i) = dy^i, Jstar(dy^i) = 0, in the natural coframe.
        auto [na, nb] = to_natural_coframe(omega, N);
        (void)nb;
        std::vector<Expr> zero_a(n, Expr::zero());
        return to_adapted_coframe(zero_a, na, N);
    }
    throw Error("apply_costar: J/h/v/F act on fields, not forms");
}

AdaptedForm to_adapted_coframe(const std::vector<Expr>& a, const std::vector<Expr>& b,
                               const Connection& N) {
    int n = N.n;
    if (int(a.size()) != n || int(b.size()) != n)
        throw Error("to_adapted_coframe: coefficient count mismatch");
    // dy^i = dy^i_adapted - coef(i,j) dx^j
    std::vector<Expr> na(n), nb(b);
    for (int j = 0; j < n; ++j) {
        Expr acc = a[j];
        for (int i = 0; i < n; ++i) acc = acc - b[i] * N.coef(i + 1, j + 1);
        na[j] = acc;
    }
    return AdaptedForm::one_form(std::move(na), std::move(nb));
}

std::pair<std::vector<Expr>, std::vector<Expr>> to_natural_coframe(const AdaptedForm& f,
                                                                   const Connection& N) {
    if (f.degree() != 1) throw Error("to_natural_coframe: expects a 1-form");
    int n = f.n();
    // dy^i_adapted = dy^i + coef(i,j) dx^j
    std::vector<Expr> na(n), nb(f.dy_coeffs());
    for (int j = 0; j < n; ++j) {
        Expr acc = f.dx_coeffs()[j];
        for (int i = 0; i < n; ++i) acc = acc + f.dy_coeffs()[i] * N.coef(i + 1, j + 1);
        na[j] = acc;
    }
    return {std::move(na), std::move(nb)};
}

bool form_equal(const AdaptedForm& f, const AdaptedForm& g) {
    if (f.n() != g.n() || f.degree() != g.degree()) return false;
    int n = f.n();
    switch (f.degree()) {
        case 0:
            return sym_equal(f.scalar_part(), g.scalar_part()).equal;
        case 1:
            for (int i = 0; i < n; ++i) {
                if (!sym_equal(f.dx_coeffs()[i], g.dx_coeffs()[i]).equal) return false;
                if (!sym_equal(f.dy_coeffs()[i], g.dy_coeffs()[i]).equal) return false;
            }
            return true;
        default:
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    if (!sym_equal(f.A(i, j), g.A(i, j)).equal) return false;
                    if (!sym_equal(f.B(i, j), g.B(i, j)).equal) return false;
                    if (!sym_equal(f.C(i, j), g.C(i, j)).equal) return false;
                }
            return true;
    }
}

}  // namespace distmech
