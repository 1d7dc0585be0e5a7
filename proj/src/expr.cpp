#include "distmech/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace distmech {

// ---------------------------------------------------------------------------
// Rational

Rational::Rational(long long n, long long d) {
    if (d == 0) throw Error("rational with zero denominator");
    if (d < 0) {
        n = -n;
        d = -d;
    }
    long long g = std::gcd(n < 0 ? -n : n, d);
    if (g == 0) g = 1;
    num = n / g;
    den = d / g;
}

Rational operator+(Rational a, Rational b) {
    return Rational(a.num * b.den + b.num * a.den, a.den * b.den);
}
Rational operator-(Rational a, Rational b) {
    return Rational(a.num * b.den - b.num * a.den, a.den * b.den);
}
Rational operator*(Rational a, Rational b) { return Rational(a.num * b.num, a.den * b.den); }
Rational operator/(Rational a, Rational b) {
    if (b.num == 0) throw Error("rational division by zero");
    return Rational(a.num * b.den, a.den * b.num);
}

Rational Rational::pow_int(long long e) const {
    if (e == 0) return Rational(1);
    bool inv = e < 0;
    if (inv && num == 0) throw Error("zero to a negative power");
    unsigned long long k = inv ? -(unsigned long long)e : (unsigned long long)e;
    Rational base = inv ? Rational(den, num) : *this;
    Rational acc(1);
    while (k) {
        if (k & 1) acc = acc * base;
        base = base * base;
        k >>= 1;
    }
    return acc;
}

std::string VarRef::name() const {
    switch (axis) {
        case VarAxis::X: return "x" + std::to_string(index);
        case VarAxis::Y: return "y" + std::to_string(index);
        default: return "t";
    }
}

// ---------------------------------------------------------------------------
// Construction

Expr Expr::make(Node n) { return Expr(std::make_shared<const Node>(std::move(n))); }

Expr::Expr() : Expr(make([] {
    Node n;
    n.kind = NodeKind::Const;
    n.value = Rational(0);
    return n;
}())) {}

Expr Expr::constant(Rational r) {
    Node n;
    n.kind = NodeKind::Const;
    n.value = r;
    return make(std::move(n));
}

Expr Expr::param(std::string name) {
    Node n;
    n.kind = NodeKind::Param;
    n.name = std::move(name);
    return make(std::move(n));
}

Expr Expr::coord(VarAxis axis, int index) {
    if (axis == VarAxis::T) return t();
    if (index < 1) throw Error("coordinate index must be >= 1");
    Node n;
    n.kind = NodeKind::Coord;
    n.axis = axis;
    n.index = index;
    return make(std::move(n));
}

Expr Expr::t() {
    Node n;
    n.kind = NodeKind::Time;
    return make(std::move(n));
}

Expr Expr::func(FuncKind f, Expr arg) {
    Node n;
    n.kind = NodeKind::Func;
    n.func = f;
    n.kids = {std::move(arg)};
    return make(std::move(n));
}

Expr Expr::add(std::vector<Expr> terms) {
    Node n;
    n.kind = NodeKind::Add;
    n.kids = std::move(terms);
    return make(std::move(n));
}

Expr Expr::mul(std::vector<Expr> factors) {
    Node n;
    n.kind = NodeKind::Mul;
    n.kids = std::move(factors);
    return make(std::move(n));
}

Expr Expr::pow(Expr base, Expr exp) {
    Node n;
    n.kind = NodeKind::Pow;
    n.kids = {std::move(base), std::move(exp)};
    return make(std::move(n));
}

Expr Expr::opaque(std::string name, int n, bool depends_t) {
    return opaque_partial(std::move(name), n, {}, depends_t);
}

Expr Expr::opaque_partial(std::string name, int n, std::vector<VarRef> partials, bool depends_t) {
    Node node;
    node.kind = NodeKind::Opaque;
    node.name = std::move(name);
    node.deps_n = n;
    node.dep_t = depends_t;
    std::sort(partials.begin(), partials.end());
    node.partials = std::move(partials);
    return make(std::move(node));
}

// ---------------------------------------------------------------------------
// Total order

static int kind_rank(NodeKind k) {
    switch (k) {
        case NodeKind::Const: return 0;
        case NodeKind::Param: return 1;
        case NodeKind::Time: return 2;
        case NodeKind::Coord: return 3;
        case NodeKind::Opaque: return 4;
        case NodeKind::Func: return 5;
        case NodeKind::Pow: return 6;
        case NodeKind::Mul: return 7;
        case NodeKind::Add: return 8;
    }
    return 9;
}

int compare(const Expr& a, const Expr& b) {
    const Node& na = a.node();
    const Node& nb = b.node();
    if (na.kind != nb.kind) return kind_rank(na.kind) < kind_rank(nb.kind) ? -1 : 1;
    switch (na.kind) {
        case NodeKind::Const: {
            // compare exact: a/b vs c/d  <=>  a*d vs c*b (dens positive)
            long long lhs = na.value.num * nb.value.den;
            long long rhs = nb.value.num * na.value.den;
            if (lhs != rhs) return lhs < rhs ? -1 : 1;
            return 0;
        }
        case NodeKind::Param:
            return na.name.compare(nb.name) < 0 ? -1 : (na.name == nb.name ? 0 : 1);
        case NodeKind::Time:
            return 0;
        case NodeKind::Coord:
            if (na.axis != nb.axis) return int(na.axis) < int(nb.axis) ? -1 : 1;
            if (na.index != nb.index) return na.index < nb.index ? -1 : 1;
            return 0;
        case NodeKind::Opaque: {
            int c = na.name.compare(nb.name);
            if (c != 0) return c < 0 ? -1 : 1;
            if (na.partials.size() != nb.partials.size())
                return na.partials.size() < nb.partials.size() ? -1 : 1;
            for (std::size_t i = 0; i < na.partials.size(); ++i) {
                if (na.partials[i] < nb.partials[i]) return -1;
                if (nb.partials[i] < na.partials[i]) return 1;
            }
            return 0;
        }
        case NodeKind::Func:
            if (na.func != nb.func) return int(na.func) < int(nb.func) ? -1 : 1;
            return compare(na.kids[0], nb.kids[0]);
        default: {
            if (na.kids.size() != nb.kids.size()) return na.kids.size() < nb.kids.size() ? -1 : 1;
            for (std::size_t i = 0; i < na.kids.size(); ++i) {
                int c = compare(na.kids[i], nb.kids[i]);
                if (c != 0) return c;
            }
            return 0;
        }
    }
}

// ---------------------------------------------------------------------------
// Printing

namespace {

// precedence: add 1, mul 2, pow 3, atom 4
int node_prec(const Node& n) {
    switch (n.kind) {
        case NodeKind::Add: return 1;
        case NodeKind::Mul: return 2;
        case NodeKind::Pow: return 3;
        case NodeKind::Const:
            return n.value.num < 0 || !n.value.is_integer() ? 2 : 4;
        default: return 4;
    }
}

std::string print(const Expr& e, int parent_prec);

std::string print_const(const Rational& r) {
    std::string s = std::to_string(r.num);
    if (!r.is_integer()) s += "/" + std::to_string(r.den);
    return s;
}

// Splits a canonical term into (negative?, printed magnitude).
std::pair<bool, std::string> print_term(const Expr& e) {
    const Node& n = e.node();
    if (n.kind == NodeKind::Const && n.value.num < 0)
        return {true, print_const(-n.value)};
    if (n.kind == NodeKind::Mul && !n.kids.empty() && n.kids[0].is_const() &&
        n.kids[0].node().value.num < 0) {
        Rational c = -n.kids[0].node().value;
        std::vector<Expr> rest(n.kids.begin() + 1, n.kids.end());
        Expr flipped = c.is_one() && rest.size() == 1
                           ? rest[0]
                           : Expr::mul([&] {
                                 std::vector<Expr> ks;
                                 if (!c.is_one()) ks.push_back(Expr::constant(c));
                                 ks.insert(ks.end(), rest.begin(), rest.end());
                                 return ks;
                             }());
        return {true, print(flipped, 2)};
    }
    return {false, print(e, 1)};
}

std::string print(const Expr& e, int parent_prec) {
    const Node& n = e.node();
    std::string out;
    switch (n.kind) {
        case NodeKind::Const:
            out = print_const(n.value);
            break;
        case NodeKind::Param:
            out = n.name;
            break;
        case NodeKind::Time:
            out = "t";
            break;
        case NodeKind::Coord:
            out = (n.axis == VarAxis::X ? "x" : "y") + std::to_string(n.index);
            break;
        case NodeKind::Opaque: {
            out = "D(" + n.name;
            for (const VarRef& v : n.partials) out += "," + v.name();
            out += ")";
            break;
        }
        case NodeKind::Func: {
            static const char* names[] = {"sin", "cos", "exp", "log"};
            out = std::string(names[int(n.func)]) + "(" + print(n.kids[0], 0) + ")";
            break;
        }
        case NodeKind::Pow: {
            const Node& ex = n.kids[1].node();
            if (ex.kind == NodeKind::Const && ex.value == Rational(1, 2)) {
                out = "sqrt(" + print(n.kids[0], 0) + ")";
                return out;  // function form, no parens needed
            }
            std::string base = print(n.kids[0], 4);  // pow binds tight; parenthesize sub-pows
            std::string exps;
            if (ex.kind == NodeKind::Const && ex.value.is_integer() && ex.value.num >= 0)
                exps = print_const(ex.value);
            else
                exps = "(" + print(n.kids[1], 0) + ")";
            out = base + "^" + exps;
            break;
        }
        case NodeKind::Mul: {
            bool first = true;
            for (const Expr& k : n.kids) {
                if (!first) out += "*";
                out += print(k, 3);
                first = false;
            }
            if (n.kids.empty()) out = "1";
            break;
        }
        case NodeKind::Add: {
            bool first = true;
            for (const Expr& k : n.kids) {
                auto [neg, s] = print_term(k);
                if (first)
                    out += (neg ? "-" : "") + s;
                else
                    out += (neg ? " - " : " + ") + s;
                first = false;
            }
            if (n.kids.empty()) out = "0";
            break;
        }
    }
    if (node_prec(n) < parent_prec) out = "(" + out + ")";
    return out;
}

}  // namespace

std::string to_string(const Expr& e) { return print(e, 0); }

// ---------------------------------------------------------------------------
// Parser

namespace {

struct Token {
    enum Kind { Num, Ident, Op, LParen, RParen, Comma, End } kind;
    Rational value;
    std::string text;
    char op = 0;
    std::size_t pos = 0;
};

class Lexer {
public:
    Lexer(const std::string& s) : s_(s) {}

    Token next() {
        while (i_ < s_.size() && std::isspace((unsigned char)s_[i_])) ++i_;
        Token t;
        t.pos = i_;
        if (i_ >= s_.size()) {
            t.kind = Token::End;
            return t;
        }
        char c = s_[i_];
        if (std::isdigit((unsigned char)c)) {
            std::size_t j = i_;
            while (j < s_.size() && std::isdigit((unsigned char)s_[j])) ++j;
            long long ip = 0;
            for (std::size_t k = i_; k < j; ++k) ip = ip * 10 + (s_[k] - '0');
            Rational val(ip);
            if (j < s_.size() && s_[j] == '.') {
                ++j;
                long long frac = 0, scale = 1;
                std::size_t fs = j;
                while (j < s_.size() && std::isdigit((unsigned char)s_[j])) {
                    frac = frac * 10 + (s_[j] - '0');
                    scale *= 10;
                    ++j;
                }
                if (j == fs) throw ParseError("expected digits after decimal point", j);
                val = val + Rational(frac, scale);
            }
            i_ = j;
            t.kind = Token::Num;
            t.value = val;
            return t;
        }
        if (std::isalpha((unsigned char)c) || c == '_') {
            std::size_t j = i_;
            while (j < s_.size() && (std::isalnum((unsigned char)s_[j]) || s_[j] == '_')) ++j;
            t.kind = Token::Ident;
            t.text = s_.substr(i_, j - i_);
            i_ = j;
            return t;
        }
        switch (c) {
            case '+': case '-': case '*': case '/': case '^':
                t.kind = Token::Op;
                t.op = c;
                ++i_;
                return t;
            case '(':
                t.kind = Token::LParen;
                ++i_;
                return t;
            case ')':
                t.kind = Token::RParen;
                ++i_;
                return t;
            case ',':
                t.kind = Token::Comma;
                ++i_;
                return t;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", i_);
    }

private:
    const std::string& s_;
    std::size_t i_ = 0;
};

class Parser {
public:
    Parser(const std::string& s, int n) : lex_(s), n_(n) { advance(); }

    Expr parse() {
        Expr e = expression();
        if (cur_.kind != Token::End) throw ParseError("trailing input", cur_.pos);
        return e;
    }

private:
    void advance() { cur_ = lex_.next(); }

    bool accept_op(char c) {
        if (cur_.kind == Token::Op && cur_.op == c) {
            advance();
            return true;
        }
        return false;
    }

    Expr expression() {
        Expr e = term();
        for (;;) {
            if (accept_op('+'))
                e = e + term();
            else if (accept_op('-'))
                e = e - term();
            else
                return e;
        }
    }

    Expr term() {
        Expr e = factor();
        for (;;) {
            if (accept_op('*'))
                e = e * factor();
            else if (accept_op('/'))
                e = e / factor();
            else
                return e;
        }
    }

    Expr factor() {
        if (accept_op('-')) return -factor();
        if (accept_op('+')) return factor();
        return power();
    }

    Expr power() {
        Expr base = primary();
        if (accept_op('^')) return Expr::pow(base, factor());  // right-associative
        return base;
    }

    VarRef parse_varref(const Token& tok) {
        const std::string& s = tok.text;
        if (s == "t") return VarRef::t();
        if ((s[0] == 'x' || s[0] == 'y') && s.size() > 1 &&
            std::all_of(s.begin() + 1, s.end(), [](char c) { return std::isdigit((unsigned char)c); })) {
            int idx = std::stoi(s.substr(1));
            if (idx < 1 || idx > n_)
                throw ParseError("coordinate index out of range: " + s, tok.pos);
            return {s[0] == 'x' ? VarAxis::X : VarAxis::Y, idx};
        }
        throw ParseError("expected coordinate or t: " + s, tok.pos);
    }

    Expr primary() {
        Token tok = cur_;
        if (tok.kind == Token::Num) {
            advance();
            return Expr::constant(tok.value);
        }
        if (tok.kind == Token::LParen) {
            advance();
            Expr e = expression();
            if (cur_.kind != Token::RParen) throw ParseError("expected ')'", cur_.pos);
            advance();
            return e;
        }
        if (tok.kind == Token::Ident) {
            advance();
            const std::string& id = tok.text;
            if (id == "t") return Expr::t();
            // coordinate?
            if ((id[0] == 'x' || id[0] == 'y') && id.size() > 1 &&
                std::all_of(id.begin() + 1, id.end(),
                            [](char c) { return std::isdigit((unsigned char)c); })) {
                int idx = std::stoi(id.substr(1));
                if (idx < 1 || idx > n_)
                    throw ParseError("coordinate index out of range: " + id, tok.pos);
                return Expr::coord(id[0] == 'x' ? VarAxis::X : VarAxis::Y, idx);
            }
            static const std::map<std::string, FuncKind> funcs = {
                {"sin", FuncKind::Sin}, {"cos", FuncKind::Cos},
                {"exp", FuncKind::Exp}, {"log", FuncKind::Log}};
            if (cur_.kind == Token::LParen) {
                advance();
                if (auto it = funcs.find(id); it != funcs.end()) {
                    Expr arg = expression();
                    if (cur_.kind != Token::RParen) throw ParseError("expected ')'", cur_.pos);
                    advance();
                    return Expr::func(it->second, arg);
                }
                if (id == "sqrt") {
                    Expr arg = expression();
                    if (cur_.kind != Token::RParen) throw ParseError("expected ')'", cur_.pos);
                    advance();
                    return sqrt(arg);
                }
                if (id == "D") {
                    if (cur_.kind != Token::Ident)
                        throw ParseError("expected symbol name in D(...)", cur_.pos);
                    std::string name = cur_.text;
                    advance();
                    std::vector<VarRef> partials;
                    while (cur_.kind == Token::Comma) {
                        advance();
                        if (cur_.kind != Token::Ident)
                            throw ParseError("expected variable in D(...)", cur_.pos);
                        VarRef v = parse_varref(cur_);
                        if (v.axis == VarAxis::T)
                            throw ParseError("t-partials of opaque symbols unsupported", cur_.pos);
                        partials.push_back(v);
                        advance();
                    }
                    if (cur_.kind != Token::RParen) throw ParseError("expected ')'", cur_.pos);
                    advance();
                    return Expr::opaque_partial(name, n_, std::move(partials));
                }
                throw ParseError("unknown function: " + id, tok.pos);
            }
            return Expr::param(id);
        }
        throw ParseError("expected expression", tok.pos);
    }

    Lexer lex_;
    Token cur_;
    int n_;
};

}  // namespace

Expr parse_expr(const std::string& text, int n) { return Parser(text, n).parse(); }

// ---------------------------------------------------------------------------
// Differentiation

Expr differentiate(const Expr& e, VarRef var) {
    const Node& n = e.node();
    switch (n.kind) {
        case NodeKind::Const:
        case NodeKind::Param:
            return Expr::zero();
        case NodeKind::Time:
            return var.axis == VarAxis::T ? Expr::one() : Expr::zero();
        case NodeKind::Coord:
            return (var.axis == n.axis && var.index == n.index) ? Expr::one() : Expr::zero();
        case NodeKind::Opaque: {
            if (var.axis == VarAxis::T) {
                if (!n.dep_t) return Expr::zero();
            } else if (var.index > n.deps_n) {
                return Expr::zero();
            }
            std::vector<VarRef> ps = n.partials;
            ps.push_back(var);
            return Expr::opaque_partial(n.name, n.deps_n, std::move(ps), n.dep_t);
        }
        case NodeKind::Func: {
            Expr u = n.kids[0];
            Expr du = differentiate(u, var);
            switch (n.func) {
                case FuncKind::Sin: return cos(u) * du;
                case FuncKind::Cos: return -(sin(u) * du);
                case FuncKind::Exp: return exp(u) * du;
                case FuncKind::Log: return du / u;
            }
            return Expr::zero();
        }
        case NodeKind::Add: {
            std::vector<Expr> terms;
            terms.reserve(n.kids.size());
            for (const Expr& k : n.kids) terms.push_back(differentiate(k, var));
            return Expr::add(std::move(terms));
        }
        case NodeKind::Mul: {
            std::vector<Expr> terms;
            for (std::size_t i = 0; i < n.kids.size(); ++i) {
                std::vector<Expr> factors;
                for (std::size_t j = 0; j < n.kids.size(); ++j)
                    factors.push_back(i == j ? differentiate(n.kids[j], var) : n.kids[j]);
                terms.push_back(Expr::mul(std::move(factors)));
            }
            return Expr::add(std::move(terms));
        }
        case NodeKind::Pow: {
            Expr u = n.kids[0], v = n.kids[1];
            Expr du = differentiate(u, var);
            Expr dv = differentiate(v, var);
            if (canonicalize(dv).is_zero()) {
                // d(u^c) = c*u^(c-1)*u'
                return v * Expr::pow(u, v - Expr::one()) * du;
            }
            return Expr::pow(u, v) * (dv * log(u) + v * du / u);
        }
    }
    return Expr::zero();
}

// ---------------------------------------------------------------------------
// Canonicalization

namespace {

struct ExprLess {
    bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
};

Expr canon(const Expr& e);

// Rebuilds coeff * sorted(factors) in canonical shape.
Expr build_product(Rational coeff, std::vector<Expr> factors) {
    if (coeff.is_zero()) return Expr::zero();
    std::sort(factors.begin(), factors.end(), [](const Expr& a, const Expr& b) {
        return compare(a, b) < 0;
    });
    std::vector<Expr> kids;
    if (!coeff.is_one()) kids.push_back(Expr::constant(coeff));
    kids.insert(kids.end(), factors.begin(), factors.end());
    if (kids.empty()) return Expr::one();
    if (kids.size() == 1) return kids[0];
    return Expr::mul(std::move(kids));
}

Expr build_sum(std::vector<Expr> terms) {
    std::sort(terms.begin(), terms.end(), [](const Expr& a, const Expr& b) {
        return compare(a, b) < 0;
    });
    if (terms.empty()) return Expr::zero();
    if (terms.size() == 1) return terms[0];
    return Expr::add(std::move(terms));
}

// Splits a canonical term into rational coefficient and residual monomial.
std::pair<Rational, Expr> split_coeff(const Expr& e) {
    const Node& n = e.node();
    if (n.kind == NodeKind::Const) return {n.value, Expr::one()};
    if (n.kind == NodeKind::Mul && !n.kids.empty() && n.kids[0].is_const()) {
        std::vector<Expr> rest(n.kids.begin() + 1, n.kids.end());
        Expr r = rest.size() == 1 ? rest[0] : Expr::mul(std::move(rest));
        return {n.kids[0].node().value, r};
    }
    return {Rational(1), e};
}

// Splits a canonical factor into (base, rational exponent) when foldable.
std::pair<Expr, Rational> split_power(const Expr& e) {
    const Node& n = e.node();
    if (n.kind == NodeKind::Pow && n.kids[1].is_const())
        return {n.kids[0], n.kids[1].node().value};
    return {e, Rational(1)};
}

Expr canon_pow(const Expr& base, const Expr& exp);

Expr canon_mul(std::vector<Expr> kids) {
    // flatten
    std::vector<Expr> flat;
    for (Expr& k : kids) {
        Expr c = canon(k);
        if (c.kind() == NodeKind::Mul)
            for (const Expr& kk : c.node().kids) flat.push_back(kk);
        else
            flat.push_back(c);
    }
    // distribute over sums
    for (std::size_t i = 0; i < flat.size(); ++i) {
        if (flat[i].kind() == NodeKind::Add) {
            std::vector<Expr> terms;
            for (const Expr& t : flat[i].node().kids) {
                std::vector<Expr> prod = flat;
                prod[i] = t;
                terms.push_back(Expr::mul(std::move(prod)));
            }
            return canon(Expr::add(std::move(terms)));
        }
    }
    Rational coeff(1);
    std::map<Expr, Rational, ExprLess> powers;
    std::vector<Expr> opaque_pows;  // non-foldable power factors
    for (const Expr& f : flat) {
        if (f.is_const()) {
            coeff = coeff * f.node().value;
            continue;
        }
        auto [base, ex] = split_power(f);
        if (f.kind() == NodeKind::Pow && !f.node().kids[1].is_const()) {
            opaque_pows.push_back(f);
            continue;
        }
        powers[base] = powers.count(base) ? powers[base] + ex : ex;
    }
    if (coeff.is_zero()) return Expr::zero();
    std::vector<Expr> factors = std::move(opaque_pows);
    for (auto& [base, ex] : powers) {
        if (ex.is_zero()) continue;
        if (base.is_const() && ex.is_integer()) {
            coeff = coeff * base.node().value.pow_int(ex.num);
            continue;
        }
        Expr f = ex.is_one() ? base : canon_pow(base, Expr::constant(ex));
        if (f.is_const())
            coeff = coeff * f.node().value;
        else if (f.kind() == NodeKind::Mul) {
            // e.g. expansion re-produced a product; merge conservatively
            for (const Expr& kf : f.node().kids) {
                if (kf.is_const())
                    coeff = coeff * kf.node().value;
                else
                    factors.push_back(kf);
            }
        } else
            factors.push_back(f);
    }
    return build_product(coeff, std::move(factors));
}

Expr canon_add(std::vector<Expr> kids) {
    std::vector<Expr> flat;
    for (Expr& k : kids) {
        Expr c = canon(k);
        if (c.kind() == NodeKind::Add)
            for (const Expr& kk : c.node().kids) flat.push_back(kk);
        else
            flat.push_back(c);
    }
    Rational cacc(0);
    std::map<Expr, Rational, ExprLess> terms;
    for (const Expr& t : flat) {
        auto [c, rest] = split_coeff(t);
        if (rest.is_one()) {
            cacc = cacc + c;
            continue;
        }
        terms[rest] = terms.count(rest) ? terms[rest] + c : c;
    }
    std::vector<Expr> out;
    if (!cacc.is_zero()) out.push_back(Expr::constant(cacc));
    for (auto& [rest, c] : terms) {
        if (c.is_zero()) continue;
        if (c.is_one()) {
            out.push_back(rest);
        } else if (rest.kind() == NodeKind::Mul) {
            std::vector<Expr> fs(rest.node().kids.begin(), rest.node().kids.end());
            out.push_back(build_product(c, std::move(fs)));
        } else {
            out.push_back(build_product(c, {rest}));
        }
    }
    return build_sum(std::move(out));
}

Expr canon_pow(const Expr& base_in, const Expr& exp_in) {
    Expr base = canon(base_in);
    Expr exp = canon(exp_in);
    if (exp.is_zero()) return Expr::one();
    if (exp.is_one()) return base;
    if (base.is_one()) return Expr::one();
    if (base.is_zero()) {
        if (exp.is_const() && exp.node().value.num > 0) return Expr::zero();
        return Expr::pow(base, exp);  // 0^negative left symbolic; evaluate raises
    }
    if (exp.is_const()) {
        Rational ev = exp.node().value;
        if (base.is_const() && ev.is_integer()) return Expr::constant(base.node().value.pow_int(ev.num));
        if (ev.is_integer()) {
            const Node& bn = base.node();
            if (bn.kind == NodeKind::Pow) {
                // (a^b)^k = a^(b*k) for integer k
                return canon_pow(bn.kids[0], canon(bn.kids[1] * exp));
            }
            if (bn.kind == NodeKind::Mul) {
                std::vector<Expr> factors;
                for (const Expr& k : bn.kids) factors.push_back(Expr::pow(k, exp));
                return canon_mul(std::move(factors));
            }
            if (bn.kind == NodeKind::Add && ev.num >= 2 && ev.num <= 8) {
                std::vector<Expr> prod((std::size_t)ev.num, base);
                return canon_mul(std::move(prod));
            }
        }
    }
    return Expr::pow(base, exp);
}

Expr canon(const Expr& e) {
    const Node& n = e.node();
    switch (n.kind) {
        case NodeKind::Const:
        case NodeKind::Param:
        case NodeKind::Time:
        case NodeKind::Coord:
        case NodeKind::Opaque:
            return e;
        case NodeKind::Func: {
            Expr arg = canon(n.kids[0]);
            if (arg.is_zero()) {
                switch (n.func) {
                    case FuncKind::Sin: return Expr::zero();
                    case FuncKind::Cos: return Expr::one();
                    case FuncKind::Exp: return Expr::one();
                    case FuncKind::Log: break;  // log(0): leave; evaluate raises
                }
            }
            if (arg.is_one() && n.func == FuncKind::Log) return Expr::zero();
            return Expr::func(n.func, arg);
        }
        case NodeKind::Add:
            return canon_add(n.kids);
        case NodeKind::Mul:
            return canon_mul(n.kids);
        case NodeKind::Pow:
            return canon_pow(n.kids[0], n.kids[1]);
    }
    return e;
}

}  // namespace

Expr canonicalize(const Expr& e) { return canon(e); }

// ---------------------------------------------------------------------------
// Evaluation

namespace {

double lookup(const Point& p, const std::string& key) {
    auto it = p.vals.find(key);
    if (it == p.vals.end()) throw EvalError("unassigned symbol: " + key);
    return it->second;
}

std::string opaque_key(const Node& n) {
    std::string key = "D(" + n.name;
    for (const VarRef& v : n.partials) key += "," + v.name();
    key += ")";
    return key;
}

}  // namespace

double evaluate(const Expr& e, const Point& p) {
    const Node& n = e.node();
    switch (n.kind) {
        case NodeKind::Const:
            return n.value.to_double();
        case NodeKind::Param:
            return lookup(p, n.name);
        case NodeKind::Time:
            return lookup(p, "t");
        case NodeKind::Coord:
            return lookup(p, VarRef{n.axis, n.index}.name());
        case NodeKind::Opaque:
            return lookup(p, opaque_key(n));
        case NodeKind::Func: {
            double u = evaluate(n.kids[0], p);
            switch (n.func) {
                case FuncKind::Sin: return std::sin(u);
                case FuncKind::Cos: return std::cos(u);
                case FuncKind::Exp: return std::exp(u);
                case FuncKind::Log:
                    if (u <= 0) throw EvalError("log of nonpositive value");
                    return std::log(u);
            }
            return 0;
        }
        case NodeKind::Add: {
            double acc = 0;
            for (const Expr& k : n.kids) acc += evaluate(k, p);
            return acc;
        }
        case NodeKind::Mul: {
            double acc = 1;
            for (const Expr& k : n.kids) acc *= evaluate(k, p);
            return acc;
        }
        case NodeKind::Pow: {
            double b = evaluate(n.kids[0], p);
            const Node& en = n.kids[1].node();
            if (en.kind == NodeKind::Const && en.value.is_integer()) {
                if (b == 0 && en.value.num < 0) throw EvalError("zero to a negative power");
                return std::pow(b, double(en.value.num));
            }
            double ex = evaluate(n.kids[1], p);
            if (b < 0) throw EvalError("negative base with non-integer exponent");
            if (b == 0 && ex < 0) throw EvalError("zero to a negative power");
            return std::pow(b, ex);
        }
    }
    return 0;
}

static void collect_symbols(const Expr& e, std::set<std::string>& out) {
    const Node& n = e.node();
    switch (n.kind) {
        case NodeKind::Param:
            out.insert(n.name);
            return;
        case NodeKind::Time:
            out.insert("t");
            return;
        case NodeKind::Coord:
            out.insert(VarRef{n.axis, n.index}.name());
            return;
        case NodeKind::Opaque:
            out.insert(opaque_key(n));
            return;
        default:
            for (const Expr& k : n.kids) collect_symbols(k, out);
    }
}

std::set<std::string> free_symbols(const Expr& e) {
    std::set<std::string> out;
    collect_symbols(e, out);
    return out;
}

Expr substitute(const Expr& e, const std::map<std::string, Expr>& by_key) {
    const Node& n = e.node();
    switch (n.kind) {
        case NodeKind::Const:
            return e;
        case NodeKind::Param: {
            auto it = by_key.find(n.name);
            return it == by_key.end() ? e : it->second;
        }
        case NodeKind::Time: {
            auto it = by_key.find("t");
            return it == by_key.end() ? e : it->second;
        }
        case NodeKind::Coord: {
            auto it = by_key.find(VarRef{n.axis, n.index}.name());
            return it == by_key.end() ? e : it->second;
        }
        case NodeKind::Opaque: {
            auto it = by_key.find(opaque_key(n));
            if (it != by_key.end()) return it->second;
            // refuse to silently substitute through an atom's hidden deps
            for (int i = 1; i <= n.deps_n; ++i) {
                if (by_key.count(VarRef::x(i).name()) || by_key.count(VarRef::y(i).name()))
                    throw Error("cannot substitute a coordinate inside opaque symbol " + n.name);
            }
            return e;
        }
        default: {
            Node copy = n;
            for (Expr& k : copy.kids) k = substitute(k, by_key);
            return [&] {
                switch (copy.kind) {
                    case NodeKind::Func: return Expr::func(copy.func, copy.kids[0]);
                    case NodeKind::Add: return Expr::add(copy.kids);
                    case NodeKind::Mul: return Expr::mul(copy.kids);
                    case NodeKind::Pow: return Expr::pow(copy.kids[0], copy.kids[1]);
                    default: return e;
                }
            }();
        }
    }
}

// ---------------------------------------------------------------------------
// Structural equality

EqResult sym_equal(const Expr& a, const Expr& b, std::uint64_t seed) {
    Expr diff = canonicalize(a - b);
    if (diff.is_zero()) return {true, EqPath::Canonical};

    std::set<std::string> syms = free_symbols(a);
    for (const std::string& s : free_symbols(b)) syms.insert(s);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(0.3, 2.3);

    Expr ca = canonicalize(a), cb = canonicalize(b);
    const int points = 32;
    for (int k = 0; k < points; ++k) {
        bool evaluated = false;
        for (int attempt = 0; attempt < 24 && !evaluated; ++attempt) {
            Point p;
            for (const std::string& s : syms) p.vals[s] = dist(rng);
            try {
                double va = evaluate(ca, p);
                double vb = evaluate(cb, p);
                evaluated = true;
                if (!(std::abs(va - vb) < 1e-9 * (1.0 + std::abs(va))))
                    return {false, EqPath::Probed};
            } catch (const EvalError&) {
                // domain miss; redraw
            }
        }
        if (!evaluated) return {false, EqPath::Probed};
    }
    return {true, EqPath::Probed};
}

}  // namespace distmech
