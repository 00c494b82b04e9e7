#pragma once

// A small expression language for metrics and potentials in base variables
// z1..zn and fiber variables v1..vr. Expressions are smooth (conj-aware)
// fields, not holomorphic functions; holomorphy is only asserted (and then
// verified) by operations that need it, such as the Schwarzian derivative.
//
// Grammar (also documented in the README):
//   expr    := term { ('+' | '-') term }
//   term    := factor { ('*' | '/') factor }
//   factor  := '-' factor | power
//   power   := primary [ '^' [ '-' ] digits ]
//   primary := number | 'i' | 'pi' | variable | func '(' expr ')' | '(' expr ')'
//   func    := 'conj' | 'abs2' | 'log' | 'exp'
//   variable:= ('z' | 'v') digits        (1-based, within declared dims)
//   number  := digits [ '.' digits ] [ ('e'|'E') ['+'|'-'] digits ]

#include <cctype>
#include <complex>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "bundlecurv/errors.hpp"
#include "bundlecurv/fields.hpp"
#include "bundlecurv/jet.hpp"
#include "bundlecurv/wirtinger.hpp"

namespace bundlecurv {

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    enum class Kind { Literal, Var, Add, Sub, Mul, Div, Pow, Neg, Conj, Abs2, Log, Exp };

    Kind kind;
    cplx literal{};        // Literal
    bool var_is_fiber = false;  // Var: z (base) or v (fiber)
    int var_index = 0;     // Var: 0-based within its family
    int power = 0;         // Pow exponent (integer, possibly negative)
    ExprPtr a, b;          // operands
    double domain_guard = 0.0;  // Div/Log/negative Pow: minimum |operand|

    static ExprPtr literal_node(cplx v) {
        auto n = std::make_shared<ExprNode>();
        n->kind = Kind::Literal;
        n->literal = v;
        return n;
    }
    static ExprPtr var_node(bool fiber, int idx) {
        auto n = std::make_shared<ExprNode>();
        n->kind = Kind::Var;
        n->var_is_fiber = fiber;
        n->var_index = idx;
        return n;
    }
    static ExprPtr binary(Kind k, ExprPtr x, ExprPtr y) {
        auto n = std::make_shared<ExprNode>();
        n->kind = k;
        n->a = std::move(x);
        n->b = std::move(y);
        if (k == Kind::Div) n->domain_guard = 1e-12;
        return n;
    }
    static ExprPtr unary(Kind k, ExprPtr x, int pw = 0) {
        auto n = std::make_shared<ExprNode>();
        n->kind = k;
        n->a = std::move(x);
        n->power = pw;
        if (k == Kind::Log || (k == Kind::Pow && pw < 0)) n->domain_guard = 1e-12;
        return n;
    }
};

/// A parsed expression together with its declared dimensions. Variables map
/// onto a single evaluation vector: z1..zn occupy slots [0,n), v1..vr slots
/// [n, n+r).
class ExprAST {
public:
    ExprAST() = default;
    ExprAST(ExprPtr root, int base_dim, int fiber_rank)
        : root_(std::move(root)), n_(base_dim), r_(fiber_rank) {}

    const ExprPtr& root() const { return root_; }
    int base_dim() const { return n_; }
    int fiber_rank() const { return r_; }
    int arity() const { return n_ + r_; }
    bool valid() const { return root_ != nullptr; }

    Jet eval_jet(std::span<const Jet> vars) const {
        if (static_cast<int>(vars.size()) != arity() || vars.empty())
            throw ShapeMismatch("expression evaluation: variable count mismatch");
        return eval_jet_node(*root_, vars);
    }
    cplxld eval_scalar(std::span<const cplxld> vars) const { return eval_scalar_node(*root_, vars); }

    /// View the expression as a differentiable Field over n+r variables.
    std::shared_ptr<Field> field() const;

private:
    int slot(const ExprNode& v) const { return v.var_is_fiber ? n_ + v.var_index : v.var_index; }

    Jet eval_jet_node(const ExprNode& e, std::span<const Jet> vars) const {
        using K = ExprNode::Kind;
        switch (e.kind) {
            case K::Literal: return Jet::constant(vars[0].space(), e.literal);
            case K::Var: return vars[static_cast<std::size_t>(slot(e))];
            case K::Add: return eval_jet_node(*e.a, vars) + eval_jet_node(*e.b, vars);
            case K::Sub: return eval_jet_node(*e.a, vars) - eval_jet_node(*e.b, vars);
            case K::Mul: return eval_jet_node(*e.a, vars) * eval_jet_node(*e.b, vars);
            case K::Div: return eval_jet_node(*e.a, vars) / eval_jet_node(*e.b, vars);
            case K::Pow: return eval_jet_node(*e.a, vars).pow_int(e.power);
            case K::Neg: return -eval_jet_node(*e.a, vars);
            case K::Conj: return eval_jet_node(*e.a, vars).conj();
            case K::Abs2: return eval_jet_node(*e.a, vars).abs2();
            case K::Log: return eval_jet_node(*e.a, vars).log();
            case K::Exp: return eval_jet_node(*e.a, vars).exp();
        }
        throw Error("unreachable expression kind");
    }

    cplxld eval_scalar_node(const ExprNode& e, std::span<const cplxld> vars) const {
        using K = ExprNode::Kind;
        switch (e.kind) {
            case K::Literal: return cplxld(e.literal.real(), e.literal.imag());
            case K::Var: return vars[static_cast<std::size_t>(slot(e))];
            case K::Add: return eval_scalar_node(*e.a, vars) + eval_scalar_node(*e.b, vars);
            case K::Sub: return eval_scalar_node(*e.a, vars) - eval_scalar_node(*e.b, vars);
            case K::Mul: return eval_scalar_node(*e.a, vars) * eval_scalar_node(*e.b, vars);
            case K::Div: {
                const cplxld den = eval_scalar_node(*e.b, vars);
                if (std::abs(den) < static_cast<long double>(e.domain_guard))
                    throw DomainError("division by near-zero value");
                return eval_scalar_node(*e.a, vars) / den;
            }
            case K::Pow: {
                cplxld base = eval_scalar_node(*e.a, vars);
                int p = e.power;
                if (p < 0) {
                    if (std::abs(base) < static_cast<long double>(e.domain_guard))
                        throw DomainError("negative power of near-zero value");
                    base = 1.0L / base;
                    p = -p;
                }
                cplxld acc = 1.0L;
                for (int k = 0; k < p; ++k) acc *= base;
                return acc;
            }
            case K::Neg: return -eval_scalar_node(*e.a, vars);
            case K::Conj: return std::conj(eval_scalar_node(*e.a, vars));
            case K::Abs2: {
                const cplxld x = eval_scalar_node(*e.a, vars);
                return x * std::conj(x);
            }
            case K::Log: {
                const cplxld x = eval_scalar_node(*e.a, vars);
                if (std::abs(x) < static_cast<long double>(e.domain_guard))
                    throw DomainError("log of near-zero modulus");
                return std::log(x);
            }
            case K::Exp: return std::exp(eval_scalar_node(*e.a, vars));
        }
        throw Error("unreachable expression kind");
    }

    ExprPtr root_;
    int n_ = 0, r_ = 0;
};

namespace detail {

class ExprField final : public Field {
public:
    explicit ExprField(ExprAST ast) : ast_(std::move(ast)) {}
    int arity() const override { return ast_.arity(); }
    Jet eval_jet(const std::shared_ptr<const JetSpace>& sp, std::span<const cplx> p) const override {
        std::vector<Jet> vars;
        vars.reserve(p.size());
        for (int i = 0; i < arity(); ++i) vars.push_back(Jet::variable(sp, i, p[static_cast<std::size_t>(i)]));
        return ast_.eval_jet(vars);
    }
    cplxld eval_scalar(std::span<const cplxld> p) const override { return ast_.eval_scalar(p); }

private:
    ExprAST ast_;
};

}  // namespace detail

inline std::shared_ptr<Field> ExprAST::field() const { return std::make_shared<detail::ExprField>(*this); }

// ---------------------------------------------------------------------------
// Parser.

namespace detail {

struct Token {
    enum class Type { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };
    Type type;
    std::size_t pos;
    double number = 0.0;
    std::string ident;
};

class Lexer {
public:
    explicit Lexer(std::string text) : text_(std::move(text)) { advance(); }

    const Token& peek() const { return tok_; }
    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        while (i_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[i_]))) ++i_;
        tok_.pos = i_;
        if (i_ >= text_.size()) {
            tok_.type = Token::Type::End;
            return;
        }
        const char c = text_[i_];
        switch (c) {
            case '+': tok_.type = Token::Type::Plus; ++i_; return;
            case '-': tok_.type = Token::Type::Minus; ++i_; return;
            case '*': tok_.type = Token::Type::Star; ++i_; return;
            case '/': tok_.type = Token::Type::Slash; ++i_; return;
            case '^': tok_.type = Token::Type::Caret; ++i_; return;
            case '(': tok_.type = Token::Type::LParen; ++i_; return;
            case ')': tok_.type = Token::Type::RParen; ++i_; return;
            default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t start = i_;
            while (i_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[i_])) || text_[i_] == '.')) ++i_;
            if (i_ < text_.size() && (text_[i_] == 'e' || text_[i_] == 'E')) {
                std::size_t save = i_;
                ++i_;
                if (i_ < text_.size() && (text_[i_] == '+' || text_[i_] == '-')) ++i_;
                if (i_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i_]))) {
                    while (i_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i_]))) ++i_;
                } else {
                    i_ = save;  // 'e' belongs to something else
                }
            }
            try {
                tok_.number = std::stod(text_.substr(start, i_ - start));
            } catch (const std::exception&) {
                throw SyntaxError("malformed number", start, "number");
            }
            tok_.type = Token::Type::Number;
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = i_;
            while (i_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[i_])) || text_[i_] == '_'))
                ++i_;
            tok_.type = Token::Type::Ident;
            tok_.ident = text_.substr(start, i_ - start);
            return;
        }
        throw SyntaxError(std::string("unexpected character '") + c + "'", i_,
                          "number, variable, function, or operator");
    }

    std::string text_;
    std::size_t i_ = 0;
    Token tok_;
};

class Parser {
public:
    Parser(const std::string& text, int n, int r) : lex_(text), n_(n), r_(r) {}

    ExprPtr parse() {
        ExprPtr e = expr();
        if (lex_.peek().type != Token::Type::End)
            throw SyntaxError("trailing input after expression", lex_.peek().pos, "end of input");
        return e;
    }

private:
    using K = ExprNode::Kind;
    using T = Token::Type;

    ExprPtr expr() {
        ExprPtr e = term();
        while (lex_.peek().type == T::Plus || lex_.peek().type == T::Minus) {
            const bool plus = lex_.take().type == T::Plus;
            e = ExprNode::binary(plus ? K::Add : K::Sub, e, term());
        }
        return e;
    }

    ExprPtr term() {
        ExprPtr e = factor();
        while (lex_.peek().type == T::Star || lex_.peek().type == T::Slash) {
            const bool mul = lex_.take().type == T::Star;
            e = ExprNode::binary(mul ? K::Mul : K::Div, e, factor());
        }
        return e;
    }

    ExprPtr factor() {
        if (lex_.peek().type == T::Minus) {
            lex_.take();
            return ExprNode::unary(K::Neg, factor());
        }
        return power();
    }

    ExprPtr power() {
        ExprPtr base = primary();
        if (lex_.peek().type != T::Caret) return base;
        lex_.take();
        int sign = 1;
        if (lex_.peek().type == T::Minus) {
            lex_.take();
            sign = -1;
        }
        const Token t = lex_.take();
        if (t.type != T::Number || t.number != static_cast<double>(static_cast<long long>(t.number)))
            throw SyntaxError("exponent must be an integer", t.pos, "integer");
        return ExprNode::unary(K::Pow, base, sign * static_cast<int>(t.number));
    }

    ExprPtr primary() {
        const Token t = lex_.take();
        switch (t.type) {
            case T::Number: return ExprNode::literal_node(cplx(t.number, 0.0));
            case T::LParen: {
                ExprPtr e = expr();
                expect(T::RParen, "')'");
                return e;
            }
            case T::Ident: return ident(t);
            default:
                throw SyntaxError("expected a value", t.pos, "number, variable, function, '-', or '('");
        }
    }

    ExprPtr ident(const Token& t) {
        const std::string& s = t.ident;
        if (s == "i") return ExprNode::literal_node(cplx(0.0, 1.0));
        if (s == "pi") return ExprNode::literal_node(cplx(3.14159265358979323846, 0.0));
        if (s == "conj" || s == "abs2" || s == "log" || s == "exp") {
            expect(T::LParen, "'('");
            ExprPtr arg = expr();
            expect(T::RParen, "')'");
            if (s == "conj") return ExprNode::unary(K::Conj, arg);
            if (s == "abs2") return ExprNode::unary(K::Abs2, arg);
            if (s == "log") return ExprNode::unary(K::Log, arg);
            return ExprNode::unary(K::Exp, arg);
        }
        if ((s[0] == 'z' || s[0] == 'v') && s.size() > 1) {
            bool digits = true;
            for (std::size_t k = 1; k < s.size(); ++k)
                if (!std::isdigit(static_cast<unsigned char>(s[k]))) digits = false;
            if (digits) {
                int idx = 0;
                try {
                    idx = std::stoi(s.substr(1));
                } catch (const std::exception&) {
                    throw UnknownVariable("variable index out of range in '" + s + "'");
                }
                const bool fiber = s[0] == 'v';
                const int limit = fiber ? r_ : n_;
                if (idx < 1 || idx > limit)
                    throw UnknownVariable("variable '" + s + "' outside declared dimensions (" +
                                          std::to_string(n_) + " base, " + std::to_string(r_) + " fiber)");
                return ExprNode::var_node(fiber, idx - 1);
            }
        }
        throw UnknownVariable("unknown identifier '" + s + "'");
    }

    void expect(T type, const char* what) {
        const Token t = lex_.take();
        if (t.type != type) throw SyntaxError(std::string("expected ") + what, t.pos, what);
    }

    Lexer lex_;
    int n_, r_;
};

}  // namespace detail

/// Parse `text` over base dimension n and fiber rank r.
inline ExprAST parse_expr(const std::string& text, int n, int r) {
    if (text.empty()) throw SyntaxError("empty expression", 0, "expression");
    return ExprAST(detail::Parser(text, n, r).parse(), n, r);
}

// ---------------------------------------------------------------------------
// Printer (canonical text; reparses to a structurally equal AST).

namespace detail {

inline int prec(ExprNode::Kind k) {
    using K = ExprNode::Kind;
    switch (k) {
        case K::Add:
        case K::Sub: return 1;
        case K::Mul:
        case K::Div: return 2;
        case K::Neg: return 3;
        case K::Pow: return 4;
        default: return 5;
    }
}

inline void print_node(std::ostream& os, const ExprNode& e, int parent_prec) {
    using K = ExprNode::Kind;
    const int p = prec(e.kind);
    const bool parens = p < parent_prec;
    if (parens) os << '(';
    switch (e.kind) {
        case K::Literal: {
            if (e.literal == cplx(0.0, 1.0)) {
                os << "i";
            } else if (e.literal.imag() == 0.0) {
                std::ostringstream tmp;
                tmp.precision(17);
                tmp << e.literal.real();
                os << tmp.str();
            } else {
                // generic complex literal: re + im*i (only from programmatic ASTs)
                std::ostringstream tmp;
                tmp.precision(17);
                tmp << '(' << e.literal.real() << '+' << e.literal.imag() << "*i)";
                os << tmp.str();
            }
            break;
        }
        case K::Var: os << (e.var_is_fiber ? 'v' : 'z') << (e.var_index + 1); break;
        case K::Add:
            print_node(os, *e.a, 1);
            os << " + ";
            print_node(os, *e.b, 2);
            break;
        case K::Sub:
            print_node(os, *e.a, 1);
            os << " - ";
            print_node(os, *e.b, 2);
            break;
        case K::Mul:
            print_node(os, *e.a, 2);
            os << "*";
            print_node(os, *e.b, 3);
            break;
        case K::Div:
            print_node(os, *e.a, 2);
            os << "/";
            print_node(os, *e.b, 3);
            break;
        case K::Neg:
            os << "-";
            print_node(os, *e.a, 3);
            break;
        case K::Pow:
            print_node(os, *e.a, 5);
            os << "^";
            if (e.power < 0)
                os << "-" << -e.power;
            else
                os << e.power;
            break;
        case K::Conj:
        case K::Abs2:
        case K::Log:
        case K::Exp: {
            const char* name = e.kind == K::Conj   ? "conj"
                               : e.kind == K::Abs2 ? "abs2"
                               : e.kind == K::Log  ? "log"
                                                   : "exp";
            os << name << '(';
            print_node(os, *e.a, 0);
            os << ')';
            break;
        }
    }
    if (parens) os << ')';
}

}  // namespace detail

inline std::string to_string(const ExprAST& ast) {
    std::ostringstream os;
    detail::print_node(os, *ast.root(), 0);
    return os.str();
}

/// Structural equality of expression trees (same shape, same payloads).
inline bool structurally_equal(const ExprPtr& x, const ExprPtr& y) {
    if (!x || !y) return x == y;
    if (x->kind != y->kind) return false;
    if (x->kind == ExprNode::Kind::Literal) return x->literal == y->literal;
    if (x->kind == ExprNode::Kind::Var) return x->var_is_fiber == y->var_is_fiber && x->var_index == y->var_index;
    if (x->kind == ExprNode::Kind::Pow && x->power != y->power) return false;
    if (!structurally_equal(x->a, y->a)) return false;
    return structurally_equal(x->b, y->b);
}

// ---------------------------------------------------------------------------
// Field-level entry points.

/// Wirtinger jet (order 4 unless stated otherwise) of the expression at a point.
inline Jet eval_field(const ExprAST& ast, std::span<const cplx> point, const DiffConfig& cfg, int order = 4) {
    return wirtinger_jet(*ast.field(), point, order, cfg);
}

/// Schwarzian derivative S(f) = f'''/f' - (3/2)(f''/f')^2 of a holomorphic
/// expression in one variable. Verifies holomorphy (dbar-derivatives vanish
/// within 1e-8) and rejects critical points.
inline cplx schwarzian(const ExprAST& f, cplx point) {
    if (f.arity() != 1) throw ShapeMismatch("schwarzian: expression must have exactly one variable");
    const Jet j = dual_jet(*f.field(), std::vector<cplx>{point}, 3);
    // holomorphy: every derivative touching the antiholomorphic slot vanishes
    const auto& sp = j.space();
    const double scale = std::max(1.0, j.max_abs_coeff());
    for (int i = 0; i < sp->size(); ++i) {
        if (sp->exponent(i)[1] == 0) continue;
        if (std::abs(j.coeff(i)) * sp->factorial_product(i) > 1e-8 * scale)
            throw DomainError("schwarzian: expression is not holomorphic at this point");
    }
    const std::vector<int> h1 = {1}, h2 = {2}, h3 = {3}, a0 = {0};
    const cplx f1 = j.deriv(h1, a0);
    if (std::abs(f1) <= 1e-10) throw CriticalPoint("schwarzian: |f'| <= 1e-10");
    const cplx f2 = j.deriv(h2, a0);
    const cplx f3 = j.deriv(h3, a0);
    const cplx q = f2 / f1;
    return f3 / f1 - 1.5 * q * q;
}

// ---------------------------------------------------------------------------
// Metric/potential catalog.

/// A named example: either an r x r fiber metric G_{i jbar}(z) over the base
/// variables, or a scalar potential over (z, v). `facts` records closed-form
/// values used by verification suites.
struct CatalogEntry {
    std::string name;
    std::string description;
    int base_dim = 1;
    int fiber_rank = 1;
    std::vector<std::vector<ExprAST>> metric;  // fiber_rank x fiber_rank, over (base_dim, 0)
    std::optional<ExprAST> potential;          // over (base_dim, fiber_rank)
    std::string chart;                         // domain note
    std::map<std::string, double> facts;
};

namespace detail {

inline CatalogEntry make_metric_entry(std::string name, std::string description, int n,
                                      const std::vector<std::vector<std::string>>& entries, std::string chart,
                                      std::map<std::string, double> facts) {
    CatalogEntry e;
    e.name = std::move(name);
    e.description = std::move(description);
    e.base_dim = n;
    e.fiber_rank = static_cast<int>(entries.size());
    for (const auto& row : entries) {
        std::vector<ExprAST> parsed;
        for (const auto& s : row) parsed.push_back(parse_expr(s, n, 0));
        e.metric.push_back(std::move(parsed));
    }
    e.chart = std::move(chart);
    e.facts = std::move(facts);
    return e;
}

inline CatalogEntry make_potential_entry(std::string name, std::string description, int n, int r,
                                         const std::string& potential, std::string chart,
                                         std::map<std::string, double> facts) {
    CatalogEntry e;
    e.name = std::move(name);
    e.description = std::move(description);
    e.base_dim = n;
    e.fiber_rank = r;
    e.potential = parse_expr(potential, n, r);
    e.chart = std::move(chart);
    e.facts = std::move(facts);
    return e;
}

inline CatalogEntry make_fs_entry(int k) {
    if (k < 1 || k > 64) throw ConfigError("fs_k: k must lie in [1, 64]");
    return make_potential_entry(
        "fs_" + std::to_string(k), "Fubini-Study potential of weight " + std::to_string(k) + " on the z1 chart",
        1, 0, std::to_string(k) + "*log(1 + abs2(z1))", "all of C (one chart of the sphere)",
        {{"hessian_at_zero", static_cast<double>(k)}, {"weight", static_cast<double>(k)}});
}

}  // namespace detail

/// The built-in examples. Names are stable identifiers.
inline const std::vector<CatalogEntry>& catalog() {
    static const std::vector<CatalogEntry> entries = [] {
        std::vector<CatalogEntry> v;
        v.push_back(detail::make_metric_entry(
            "flat", "rank-1 flat metric over one base variable", 1, {{"1"}}, "all of C",
            {{"curvature", 0.0}}));
        v.push_back(detail::make_metric_entry(
            "o_minus_one", "tautological-bundle-style metric 1 + |z|^2", 1, {{"1 + abs2(z1)"}}, "all of C",
            {{"curvature_at_zero", -1.0}}));
        v.push_back(detail::make_metric_entry(
            "gauss", "Gaussian metric exp(-|z|^2)", 1, {{"exp(-abs2(z1))"}}, "all of C",
            {{"curvature_at_zero", 1.0}}));
        v.push_back(detail::make_potential_entry(
            "poincare", "Poincare-disk base potential -2 log(1-|z|^2)", 1, 0, "-2*log(1 - abs2(z1))",
            "unit disk |z1| < 1", {{"metric_at_zero", 2.0}, {"ricci_per_unit_metric", -1.0}}));
        for (int k = 1; k <= 3; ++k) v.push_back(detail::make_fs_entry(k));
        v.push_back(detail::make_potential_entry(
            "theta_family", "theta-line-bundle potential 2 pi (Im w)^2 / Im tau (z1 = tau, v1 = w)", 1, 1,
            "2*pi*((v1 - conj(v1))/(2*i))^2/((z1 - conj(z1))/(2*i))", "upper half plane in z1, all of C in v1",
            {{"lambda0_at_tau_i", 3.14159265358979323846}}));
        return v;
    }();
    return entries;
}

/// Look up a catalog entry by name. `fs_<k>` is parametric: any k in [1, 64]
/// resolves even though only small k are materialized in catalog().
inline CatalogEntry catalog_entry(const std::string& name) {
    for (const auto& e : catalog())
        if (e.name == name) return e;
    if (name.rfind("fs_", 0) == 0) {
        const std::string tail = name.substr(3);
        if (!tail.empty() && tail.size() <= 3 && tail.find_first_not_of("0123456789") == std::string::npos)
            return detail::make_fs_entry(std::stoi(tail));
    }
    throw ConfigError("unknown catalog entry '" + name + "'");
}

}  // namespace bundlecurv
