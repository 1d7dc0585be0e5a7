#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace distmech {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised by parse_expr; `pos` is the byte offset of the offending token.
struct ParseError : Error {
    std::size_t pos;
    ParseError(const std::string& msg, std::size_t p) : Error(msg), pos(p) {}
};

/// Raised by evaluate: unassigned symbol or numeric domain violation.
struct EvalError : Error {
    using Error::Error;
};

/// Exact rational, always normalized (den > 0, gcd(num,den) = 1).
struct Rational {
    long long num = 0;
    long long den = 1;

    Rational() = default;
    Rational(long long n, long long d = 1);

    bool is_zero() const { return num == 0; }
    bool is_one() const { return num == 1 && den == 1; }
    bool is_integer() const { return den == 1; }
    double to_double() const { return double(num) / double(den); }

    friend Rational operator+(Rational a, Rational b);
    friend Rational operator-(Rational a, Rational b);
    friend Rational operator*(Rational a, Rational b);
    friend Rational operator/(Rational a, Rational b);
    Rational operator-() const { return Rational(-num, den); }
    friend bool operator==(Rational a, Rational b) { return a.num == b.num && a.den == b.den; }
    friend bool operator!=(Rational a, Rational b) { return !(a == b); }

    // Integer power; exp may be negative (num must be nonzero then).
    Rational pow_int(long long e) const;
};

enum class VarAxis { X, Y, T };

/// A differentiation variable: x_i, y_i (1-based index) or t (index 0).
struct VarRef {
    VarAxis axis = VarAxis::T;
    int index = 0;

    static VarRef x(int i) { return {VarAxis::X, i}; }
    static VarRef y(int i) { return {VarAxis::Y, i}; }
    static VarRef t() { return {VarAxis::T, 0}; }

    friend bool operator==(VarRef a, VarRef b) { return a.axis == b.axis && a.index == b.index; }
    friend bool operator<(VarRef a, VarRef b) {
        if (a.axis != b.axis) return int(a.axis) < int(b.axis);
        return a.index < b.index;
    }
    std::string name() const;
};

enum class FuncKind { Sin, Cos, Exp, Log };

enum class NodeKind { Const, Param, Coord, Time, Func, Add, Mul, Pow, Opaque };

class Expr;

struct Node {
    NodeKind kind;
    Rational value;               // Const
    std::string name;             // Param, Opaque
    VarAxis axis = VarAxis::T;    // Coord
    int index = 0;                // Coord (1-based)
    FuncKind func = FuncKind::Sin;
    std::vector<Expr> kids;       // Add/Mul operands; Pow {base, exp}; Func {arg}
    // Opaque: named function of (x1..xn, y1..yn[, t]) with an applied list of
    // natural partials, kept sorted (mixed natural partials commute).
    int deps_n = 0;
    bool dep_t = false;
    std::vector<VarRef> partials;
};

/// Immutable symbolic expression handle. All operations are pure.
class Expr {
public:
    Expr();  // the constant 0

    static Expr constant(Rational r);
    static Expr integer(long long v) { return constant(Rational(v)); }
    static Expr rational(long long n, long long d) { return constant(Rational(n, d)); }
    static Expr param(std::string name);
    static Expr coord(VarAxis axis, int index);
    static Expr x(int i) { return coord(VarAxis::X, i); }
    static Expr y(int i) { return coord(VarAxis::Y, i); }
    static Expr t();
    static Expr func(FuncKind f, Expr arg);
    static Expr add(std::vector<Expr> terms);
    static Expr mul(std::vector<Expr> factors);
    static Expr pow(Expr base, Expr exp);
    /// Named scalar depending on x1..xn, y1..yn (and t when depends_t).
    static Expr opaque(std::string name, int n, bool depends_t = false);
    /// A partial-derivative atom of an opaque symbol.
    static Expr opaque_partial(std::string name, int n, std::vector<VarRef> partials,
                               bool depends_t = false);

    static Expr zero() { return integer(0); }
    static Expr one() { return integer(1); }

    const Node& node() const { return *n_; }
    NodeKind kind() const { return n_->kind; }
    bool is_const() const { return n_->kind == NodeKind::Const; }
    bool is_zero() const { return is_const() && n_->value.is_zero(); }
    bool is_one() const { return is_const() && n_->value.is_one(); }

    friend Expr operator+(const Expr& a, const Expr& b) { return add({a, b}); }
    friend Expr operator-(const Expr& a, const Expr& b) { return add({a, mul({integer(-1), b})}); }
    friend Expr operator*(const Expr& a, const Expr& b) { return mul({a, b}); }
    friend Expr operator/(const Expr& a, const Expr& b) { return mul({a, pow(b, integer(-1))}); }
    Expr operator-() const { return mul({integer(-1), *this}); }

private:
    explicit Expr(std::shared_ptr<const Node> n) : n_(std::move(n)) {}
    static Expr make(Node n);
    std::shared_ptr<const Node> n_;
};

inline Expr sin(Expr e) { return Expr::func(FuncKind::Sin, std::move(e)); }
inline Expr cos(Expr e) { return Expr::func(FuncKind::Cos, std::move(e)); }
inline Expr exp(Expr e) { return Expr::func(FuncKind::Exp, std::move(e)); }
inline Expr log(Expr e) { return Expr::func(FuncKind::Log, std::move(e)); }
inline Expr sqrt(Expr e) { return Expr::pow(std::move(e), Expr::rational(1, 2)); }

/// Total order on expression trees; defines canonical term/factor sorting.
int compare(const Expr& a, const Expr& b);

/// Parse the workbench grammar in dimension n. Throws ParseError.
Expr parse_expr(const std::string& text, int n);

/// Emits the same grammar parse_expr accepts; parse(to_string(e)) sym_equal e.
std::string to_string(const Expr& e);

/// Exact partial derivative with respect to x_i, y_i or t.
Expr differentiate(const Expr& e, VarRef var);

/// Normal form: flattened and sorted sums/products, folded constants,
/// merged like terms, expanded products of sums. Idempotent.
Expr canonicalize(const Expr& e);

/// Evaluation context. Keys: "x1", "y2", "t", parameter names, and opaque
/// atom spellings such as "D(L,x1,y1)".
struct Point {
    int n = 0;
    std::unordered_map<std::string, double> vals;

    Point() = default;
    Point(int dim, std::initializer_list<std::pair<const std::string, double>> init)
        : n(dim), vals(init) {}
    Point& set(const std::string& key, double v) {
        vals[key] = v;
        return *this;
    }
};

double evaluate(const Expr& e, const Point& p);

/// Symbol keys of every free symbol of e (coords, t, params, opaque atoms).
std::set<std::string> free_symbols(const Expr& e);

/// Replace leaf symbols (by key) with expressions. Throws if an opaque atom
/// depends on a coordinate being substituted.
Expr substitute(const Expr& e, const std::map<std::string, Expr>& by_key);

enum class EqPath { Canonical, Probed };

struct EqResult {
    bool equal = false;
    EqPath path = EqPath::Canonical;
    explicit operator bool() const { return equal; }
};

/// Structural equality check: canonicalize(a-b) == 0, with a randomized
/// 32-point probing fallback (|a-b| < 1e-9*(1+|a|) at every point).
EqResult sym_equal(const Expr& a, const Expr& b, std::uint64_t seed = 0x5eedULL);

}  // namespace distmech
