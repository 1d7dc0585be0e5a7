#include <doctest.h>

#include "distmech/forms.hpp"
#include "distmech/hamiltonian.hpp"

using namespace distmech;

namespace {

AdaptedForm generic_one_form(int n, const std::string& prefix) {
    std::vector<Expr> a(n), b(n);
    for (int i = 0; i < n; ++i) {
        a[i] = Expr::param(prefix + "a" + std::to_string(i + 1));
        b[i] = Expr::param(prefix + "b" + std::to_string(i + 1));
    }
    return AdaptedForm::one_form(std::move(a), std::move(b));
}

bool is_zero_form(const AdaptedForm& f) { return form_equal(f, AdaptedForm::zero(f.n(), f.degree())); }

}  // namespace

TEST_CASE("degree-2 storage enforces antisymmetry through mirrored reads") {
    AdaptedForm f = AdaptedForm::zero(2, 2);
    f.add_dxdx(0, 1, Expr::param("a"));
    CHECK(sym_equal(f.A(0, 1), Expr::param("a")).equal);
    CHECK(sym_equal(f.A(1, 0), -Expr::param("a")).equal);
    CHECK(sym_equal(f.A(0, 0), Expr::zero()).equal);

    // Accumulating in the mirrored slot subtracts.
    f.add_dxdx(1, 0, Expr::param("a"));
    CHECK(sym_equal(f.A(0, 1), Expr::zero()).equal);

    f.add_dydy(1, 0, Expr::param("c"));
    CHECK(sym_equal(f.C(1, 0), Expr::param("c")).equal);
    CHECK(sym_equal(f.C(0, 1), -Expr::param("c")).equal);
}

TEST_CASE("wedge of basis 1-forms lands in the right block with the right sign") {
    int n = 2;
    auto basis_dx = [&](int i) {
        std::vector<Expr> a(n, Expr::zero()), b(n, Expr::zero());
        a[i] = Expr::one();
        return AdaptedForm::one_form(a, b);
    };
    auto basis_dy = [&](int i) {
        std::vector<Expr> a(n, Expr::zero()), b(n, Expr::zero());
        b[i] = Expr::one();
        return AdaptedForm::one_form(a, b);
    };

    AdaptedForm dx0dx1 = wedge(basis_dx(0), basis_dx(1));
    CHECK(sym_equal(dx0dx1.A(0, 1), Expr::one()).equal);

    AdaptedForm dx0dy1 = wedge(basis_dx(0), basis_dy(1));
    CHECK(sym_equal(dx0dy1.B(0, 1), Expr::one()).equal);

    // dy^1 ^ dx^0 = -(dx^0 ^ dy^1).
    AdaptedForm dy1dx0 = wedge(basis_dy(1), basis_dx(0));
    CHECK(sym_equal(dy1dx0.B(0, 1), -Expr::one()).equal);

    AdaptedForm dy0dy1 = wedge(basis_dy(0), basis_dy(1));
    CHECK(sym_equal(dy0dy1.C(0, 1), Expr::one()).equal);

    // Self-wedge vanishes.
    CHECK(is_zero_form(wedge(basis_dx(0), basis_dx(0))));
}

TEST_CASE("wedge is graded-commutative and scalar-wedge is multiplication") {
    AdaptedForm f = generic_one_form(2, "f");
    AdaptedForm g = generic_one_form(2, "g");
    CHECK(form_equal(wedge(f, g), -wedge(g, f)));

    AdaptedForm s = AdaptedForm::scalar(2, Expr::param("s"));
    AdaptedForm sf = wedge(s, f);
    for (int i = 0; i < 2; ++i) {
        CHECK(sym_equal(sf.dx_coeffs()[i], Expr::param("s") * f.dx_coeffs()[i]).equal);
        CHECK(sym_equal(sf.dy_coeffs()[i], Expr::param("s") * f.dy_coeffs()[i]).equal);
    }
}

TEST_CASE("exterior derivative of a scalar produces adapted gradient coefficients") {
    Connection N = Connection::zero(2);
    N.N[0][0] = Expr::param("n");
    Expr f = parse_expr("x1*y1", 2);
    AdaptedForm df = exterior_d(AdaptedForm::scalar(2, f), N);
    CHECK(sym_equal(df.dx_coeffs()[0], parse_expr("y1 - n*x1", 2)).equal);
    CHECK(sym_equal(df.dy_coeffs()[0], Expr::x(1)).equal);
    CHECK(sym_equal(df.dx_coeffs()[1], Expr::zero()).equal);
}

TEST_CASE("d squared vanishes on scalars when the adapted derivatives commute") {
    Connection flat = Connection::zero(2);
    flat.N[0][1] = Expr::param("c");
    Expr f = parse_expr("sin(x1)*y2 + x2^2*y1", 2);
    AdaptedForm ddf = exterior_d(exterior_d(AdaptedForm::scalar(2, f), flat), flat);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            CHECK(sym_equal(ddf.A(i, j), Expr::zero()).equal);
            CHECK(sym_equal(ddf.B(i, j), Expr::zero()).equal);
            CHECK(sym_equal(ddf.C(i, j), Expr::zero()).equal);
        }
}

TEST_CASE("d squared picks up the commutator defect for curved connections") {
    Connection curved = Connection::zero(2);
    curved.N[0][1] = parse_expr("x2^2", 2);
    Expr f = Expr::y(2);
    AdaptedForm ddf = exterior_d(exterior_d(AdaptedForm::scalar(2, f), curved), curved);
    bool nonzero = false;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) nonzero = nonzero || !sym_equal(ddf.A(i, j), Expr::zero()).equal;
    CHECK(nonzero);
}

TEST_CASE("graded Leibniz rule for d on scalar times 1-form") {
    Connection N = Connection::zero(2);
    N.N[1][0] = Expr::x(1);
    Expr s = parse_expr("x1*y2", 2);
    AdaptedForm omega = AdaptedForm::one_form({Expr::y(1), Expr::zero()},
                                              {Expr::zero(), Expr::x(2)});
    AdaptedForm lhs = exterior_d(wedge(AdaptedForm::scalar(2, s), omega), N);
    AdaptedForm rhs = wedge(exterior_d(AdaptedForm::scalar(2, s), N), omega) +
                      wedge(AdaptedForm::scalar(2, s), exterior_d(omega, N));
    CHECK(form_equal(lhs.canonicalized(), rhs.canonicalized()));
}

TEST_CASE("interior product pairs a field with a 1-form and contracts 2-forms") {
    AdaptedVectorField X({Expr::param("u1"), Expr::param("u2")},
                         {Expr::param("w1"), Expr::param("w2")});
    AdaptedForm omega = generic_one_form(2, "o");
    AdaptedForm pairing = interior(X, omega);
    Expr want = Expr::zero();
    for (int i = 0; i < 2; ++i)
        want = want + X.h[i] * omega.dx_coeffs()[i] + X.v[i] * omega.dy_coeffs()[i];
    CHECK(sym_equal(pairing.scalar_part(), want).equal);

    // i_X(dx^0 ^ dy^0) = u1 dy^0 - w1 dx^0.
    AdaptedForm two = AdaptedForm::zero(2, 2);
    two.add_dxdy(0, 0, Expr::one());
    AdaptedForm c = interior(X, two);
    CHECK(sym_equal(c.dy_coeffs()[0], Expr::param("u1")).equal);
    CHECK(sym_equal(c.dx_coeffs()[0], -Expr::param("w1")).equal);
}

TEST_CASE("interior product is an antiderivation against the wedge") {
    AdaptedVectorField X({Expr::param("u1"), Expr::param("u2")},
                         {Expr::param("w1"), Expr::param("w2")});
    AdaptedForm f = generic_one_form(2, "p");
    AdaptedForm g = generic_one_form(2, "q");
    AdaptedForm lhs = interior(X, wedge(f, g));
    AdaptedForm rhs = wedge(interior(X, f), g) - wedge(interior(X, g), f);
    CHECK(form_equal(lhs.canonicalized(), rhs.canonicalized()));
}

TEST_CASE("vertical derivation substitutes the quarter-turn slot by slot") {
    AdaptedForm omega = generic_one_form(2, "v");
    AdaptedForm iF = vertical_derivation(omega);
    for (int i = 0; i < 2; ++i) {
        CHECK(sym_equal(iF.dx_coeffs()[i], -omega.dy_coeffs()[i]).equal);
        CHECK(sym_equal(iF.dy_coeffs()[i], omega.dx_coeffs()[i]).equal);
    }
    // Twice on a 1-form gives -identity (one slot, F^2 = -I).
    CHECK(form_equal(vertical_derivation(iF).canonicalized(), (-omega).canonicalized()));
}

TEST_CASE("vertical differential of a scalar") {
    Connection N = Connection::zero(1);
    N.N[0][0] = Expr::param("n");
    Expr f = parse_expr("x1^2*y1", 1);
    AdaptedForm dF = vertical_differential(f, N);
    // -df/dy dx + (adapted df/dx) dy.
    CHECK(sym_equal(dF.dx_coeffs()[0], parse_expr("-x1^2", 1)).equal);
    CHECK(sym_equal(dF.dy_coeffs()[0], parse_expr("2*x1*y1 - n*x1^2", 1)).equal);
}

TEST_CASE("coframe change of basis round trips") {
    Connection N = Connection::zero(2);
    N.N[0][1] = Expr::param("n12");
    N.N[1][0] = Expr::x(1);
    std::vector<Expr> a = {Expr::param("a1"), Expr::param("a2")};
    std::vector<Expr> b = {Expr::param("b1"), Expr::param("b2")};
    AdaptedForm adapted = to_adapted_coframe(a, b, N);
    auto [na, nb] = to_natural_coframe(adapted, N);
    for (int i = 0; i < 2; ++i) {
        CHECK(sym_equal(na[i], a[i]).equal);
        CHECK(sym_equal(nb[i], b[i]).equal);
    }
}

TEST_CASE("almost-complex costar on the coframe squares to -identity") {
    Connection N = Connection::zero(2);
    N.N[0][0] = Expr::param("n");
    AdaptedForm omega = generic_one_form(2, "c");
    AdaptedForm once = apply_costar(FrameOp::Fstar, omega, N);
    // F*(dx) = -dy_adapted, F*(dy_adapted) = dx.
    for (int i = 0; i < 2; ++i) {
        CHECK(sym_equal(once.dx_coeffs()[i], omega.dy_coeffs()[i]).equal);
        CHECK(sym_equal(once.dy_coeffs()[i], -omega.dx_coeffs()[i]).equal);
    }
    AdaptedForm twice = apply_costar(FrameOp::Fstar, once, N);
    CHECK(form_equal(twice.canonicalized(), (-omega).canonicalized()));
}

TEST_CASE("nilpotent costar reads the natural coframe") {
    Connection N = Connection::zero(1);
    N.N[0][0] = Expr::param("n");
    // J* sends dx -> dy (natural), kills dy; applying twice annihilates.
    AdaptedForm omega = generic_one_form(1, "j");
    AdaptedForm once = apply_costar(FrameOp::Jstar, omega, N);
    AdaptedForm twice = apply_costar(FrameOp::Jstar, once, N);
    CHECK(is_zero_form(twice.canonicalized()));
}

TEST_CASE("structural 1-forms and the canonical 2-form") {
    auto [omega, lambda] = liouville_one_form(2);
    Connection N = Connection::zero(2);

    // The canonical 2-form is dy^i_adapted ^ dx^i: B(i,i) = -1.
    AdaptedForm phi = canonical_symplectic(2, N);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            CHECK(sym_equal(phi.B(i, j), i == j ? -Expr::one() : Expr::zero()).equal);
            CHECK(sym_equal(phi.A(i, j), Expr::zero()).equal);
            CHECK(sym_equal(phi.C(i, j), Expr::zero()).equal);
        }

    // The coefficient-wise exterior derivative of lambda = (y dx - x dy)/2
    // gives exactly the canonical 2-form when N = 0.
    AdaptedForm dlambda = exterior_d(lambda, N);
    CHECK(form_equal(dlambda.canonicalized(), phi.canonicalized()));

    // omega = (x dx + y dy)/2 is exact, hence closed.
    AdaptedForm domega = exterior_d(omega, N);
    CHECK(is_zero_form(domega.canonicalized()));

    // F* exchanges the two structural 1-forms: F*(lambda) = -omega.
    AdaptedForm fstar_lambda = apply_costar(FrameOp::Fstar, lambda, N);
    CHECK(form_equal(fstar_lambda.canonicalized(), (-omega).canonicalized()));
}
