// Expression language: parsing, printing, evaluation, Schwarzian, catalog.

#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "bundlecurv/expr.hpp"
#include "bundlecurv/rng.hpp"
#include "bundlecurv/tensor.hpp"

using namespace bundlecurv;

namespace {

cplx value_at(const ExprAST& ast, std::vector<cplx> p) {
    const Jet j = dual_jet(*ast.field(), p, 0);
    return j.value();
}

}  // namespace

TEST_CASE("parse and evaluate basic expressions") {
    DiffConfig cfg;

    ExprAST a = parse_expr("1 + abs2(z1)", 1, 1);
    const Jet ja = eval_field(a, std::vector<cplx>{cplx(0, 0), cplx(0, 0)}, cfg, 2);
    CHECK(std::abs(ja.value() - cplx(1.0)) < 1e-14);
    CHECK(std::abs(ja.d2(0, 0) - cplx(1.0)) < 1e-12);

    ExprAST b = parse_expr("exp(-abs2(z1))", 1, 0);
    CHECK(std::abs(value_at(b, {cplx(1, 0)}) - std::exp(-1.0)) < 1e-14);

    ExprAST c = parse_expr("log(1+abs2(z1))", 1, 0);
    const Jet jc = eval_field(c, std::vector<cplx>{cplx(0, 0)}, cfg, 2);
    CHECK(std::abs(jc.d2(0, 0) - cplx(1.0)) < 1e-12);

    CHECK_THROWS_AS(parse_expr("1 + conj(w)", 1, 1), UnknownVariable);
}

TEST_CASE("operator precedence and associativity") {
    CHECK(std::abs(value_at(parse_expr("1 - 2 - 3", 1, 0), {cplx(0, 0)}) - cplx(-4.0)) < 1e-14);
    CHECK(std::abs(value_at(parse_expr("2 + 3*4", 1, 0), {cplx(0, 0)}) - cplx(14.0)) < 1e-14);
    CHECK(std::abs(value_at(parse_expr("12/3/2", 1, 0), {cplx(0, 0)}) - cplx(2.0)) < 1e-14);
    // unary minus binds looser than power: -z1^2 = -(z1^2)
    CHECK(std::abs(value_at(parse_expr("-z1^2", 1, 0), {cplx(2, 0)}) - cplx(-4.0)) < 1e-14);
    CHECK(std::abs(value_at(parse_expr("2^-1", 1, 0), {cplx(0, 0)}) - cplx(0.5)) < 1e-14);
    CHECK(std::abs(value_at(parse_expr("(1+2)*3", 1, 0), {cplx(0, 0)}) - cplx(9.0)) < 1e-14);
    // constants
    CHECK(std::abs(value_at(parse_expr("i*i", 1, 0), {cplx(0, 0)}) - cplx(-1.0)) < 1e-14);
    CHECK(std::abs(value_at(parse_expr("pi", 1, 0), {cplx(0, 0)}) - cplx(3.14159265358979323846)) < 1e-15);
}

TEST_CASE("print/parse round trip is structurally stable") {
    const std::vector<std::string> samples = {
        "1 + abs2(z1)",
        "exp(-abs2(z1))",
        "-2*log(1 - abs2(z1))",
        "2*pi*((v1 - conj(v1))/(2*i))^2/((z1 - conj(z1))/(2*i))",
        "z1^2*conj(z2) + v1/(1 + abs2(z1))",
        "1 - -2",
        "(z1 + z2)^3",
        "z1^-2 + 0.125e-2",
        "conj(z1)*i - abs2(v2)",
    };
    for (const auto& text : samples) {
        CAPTURE(text);
        ExprAST ast = parse_expr(text, 2, 2);
        ExprAST again = parse_expr(to_string(ast), 2, 2);
        CHECK(structurally_equal(ast.root(), again.root()));
    }
}

TEST_CASE("syntax errors carry position and expectation") {
    try {
        parse_expr("1 + + 2", 1, 0);
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
        CHECK(e.position == 4);
        CHECK(!e.expected.empty());
    }
    CHECK_THROWS_AS(parse_expr("1 + (2", 1, 0), SyntaxError);
    CHECK_THROWS_AS(parse_expr("z1^z1", 1, 0), SyntaxError);
    CHECK_THROWS_AS(parse_expr("z1^1.5", 1, 0), SyntaxError);
    CHECK_THROWS_AS(parse_expr("", 1, 0), SyntaxError);
    CHECK_THROWS_AS(parse_expr("1 2", 1, 0), SyntaxError);
    CHECK_THROWS_AS(parse_expr("1 @ 2", 1, 0), SyntaxError);
    CHECK_THROWS_AS(parse_expr("log 4", 1, 0), SyntaxError);

    CHECK_THROWS_AS(parse_expr("w", 1, 0), UnknownVariable);
    CHECK_THROWS_AS(parse_expr("z2", 1, 0), UnknownVariable);
    CHECK_THROWS_AS(parse_expr("v1", 1, 0), UnknownVariable);
    CHECK_THROWS_AS(parse_expr("z0", 1, 0), UnknownVariable);
    CHECK_THROWS_AS(parse_expr("z99999999999999999999", 1, 0), UnknownVariable);
}

TEST_CASE("domain guards fire on singular evaluations") {
    DiffConfig cfg;
    ExprAST inv = parse_expr("1/z1", 1, 0);
    CHECK_THROWS_AS(eval_field(inv, std::vector<cplx>{cplx(0, 0)}, cfg, 1), DomainError);
    CHECK(std::abs(value_at(inv, {cplx(2, 0)}) - cplx(0.5)) < 1e-14);

    ExprAST lg = parse_expr("log(z1 - z1)", 1, 0);
    CHECK_THROWS_AS(eval_field(lg, std::vector<cplx>{cplx(1, 0)}, cfg, 1), DomainError);

    ExprAST negpow = parse_expr("z1^-2", 1, 0);
    CHECK_THROWS_AS(eval_field(negpow, std::vector<cplx>{cplx(0, 0)}, cfg, 1), DomainError);

    // the long-double path guards too
    const std::vector<cplxld> zero = {cplxld(0.0L, 0.0L)};
    CHECK_THROWS_AS(inv.eval_scalar(zero), DomainError);
}

TEST_CASE("cross-check mode on expression fields") {
    DiffConfig cfg;  // cross-check by default
    ExprAST g = parse_expr("log(1 + abs2(z1)*exp(z1 + conj(z1)))", 1, 0);
    const Jet j = eval_field(g, std::vector<cplx>{cplx(0.3, -0.2)}, cfg, 4);
    CHECK(j.all_finite());
}

TEST_CASE("schwarzian closed forms") {
    // Moebius maps are in the kernel
    ExprAST moebius = parse_expr("(2*z1 + 1)/(z1 + 3)", 1, 0);
    Rng rng(5);
    for (int k = 0; k < 5; ++k) {
        const cplx p = rng.complex_in_box(1.0);
        CHECK(std::abs(schwarzian(moebius, p)) < 1e-9);
    }

    ExprAST ez = parse_expr("exp(z1)", 1, 0);
    CHECK(std::abs(schwarzian(ez, cplx(0, 0)) - cplx(-0.5)) < 1e-10);

    ExprAST sq = parse_expr("z1^2", 1, 0);
    CHECK(std::abs(schwarzian(sq, cplx(1, 0)) - cplx(-1.5)) < 1e-10);

    CHECK_THROWS_AS(schwarzian(sq, cplx(0, 0)), CriticalPoint);
    ExprAST anti = parse_expr("conj(z1) + z1^3", 1, 0);
    CHECK_THROWS_AS(schwarzian(anti, cplx(0.5, 0.1)), DomainError);
}

TEST_CASE("schwarzian cocycle: S(m o f) = S(f) for Moebius m") {
    // m(w) = (w - 2) / (3w + 1), f = exp(z)
    ExprAST f = parse_expr("exp(z1)", 1, 0);
    ExprAST mf = parse_expr("(exp(z1) - 2)/(3*exp(z1) + 1)", 1, 0);
    Rng rng(17);
    for (int k = 0; k < 8; ++k) {
        const cplx p = rng.complex_in_box(0.8);
        CAPTURE(p.real(), p.imag());
        CHECK(std::abs(schwarzian(mf, p) - schwarzian(f, p)) < 1e-8);
    }
}

TEST_CASE("catalog entries are well-formed") {
    const auto& entries = catalog();
    REQUIRE(entries.size() >= 6);

    const std::vector<std::string> names = {"flat",     "o_minus_one", "gauss", "poincare",
                                            "fs_1",     "fs_2",        "fs_3",  "theta_family"};
    for (const auto& n : names) CHECK_NOTHROW(catalog_entry(n));
    CHECK_THROWS_AS(catalog_entry("no_such_metric"), ConfigError);

    // metric-style entries are Hermitian positive on sample points
    Rng rng(23);
    for (const auto& name : {"flat", "o_minus_one", "gauss"}) {
        const CatalogEntry e = catalog_entry(name);
        REQUIRE(!e.metric.empty());
        for (int trial = 0; trial < 4; ++trial) {
            std::vector<cplx> z;
            for (int k = 0; k < e.base_dim; ++k) z.push_back(rng.complex_in_box(1.0));
            Eigen::MatrixXcd g(e.fiber_rank, e.fiber_rank);
            for (int i = 0; i < e.fiber_rank; ++i)
                for (int j = 0; j < e.fiber_rank; ++j)
                    g(i, j) = value_at(e.metric[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], z);
            EigenResult r = hermitian_eigen(g);
            CHECK(r.values.minCoeff() > 0.0);
        }
    }
}

TEST_CASE("catalog closed-form facts") {
    DiffConfig cfg;

    // poincare: complex Hessian of the potential at 0 is 2
    const CatalogEntry poincare = catalog_entry("poincare");
    REQUIRE(poincare.potential.has_value());
    const Jet jp = eval_field(*poincare.potential, std::vector<cplx>{cplx(0, 0)}, cfg, 2);
    CHECK(std::abs(jp.d2(0, 0) - cplx(poincare.facts.at("metric_at_zero"))) < 1e-12);

    // fs_k: Hessian at 0 equals k, including parametric lookups
    for (const auto& name : {"fs_1", "fs_3", "fs_5", "fs_12"}) {
        const CatalogEntry e = catalog_entry(name);
        REQUIRE(e.potential.has_value());
        const Jet j = eval_field(*e.potential, std::vector<cplx>{cplx(0, 0)}, cfg, 2);
        CHECK(std::abs(j.d2(0, 0) - cplx(e.facts.at("hessian_at_zero"))) < 1e-11);
    }
    CHECK_THROWS_AS(catalog_entry("fs_0"), ConfigError);
    CHECK_THROWS_AS(catalog_entry("fs_900"), ConfigError);

    // theta_family: potential value and fiber Hessian
    const CatalogEntry theta = catalog_entry("theta_family");
    REQUIRE(theta.potential.has_value());
    const cplx tau(0.0, 1.0), w(0.0, 0.3);
    const std::vector<cplx> p = {tau, w};
    const Jet jt = eval_field(*theta.potential, p, cfg, 2);
    const double want = 2.0 * 3.14159265358979323846 * 0.3 * 0.3;  // 2 pi (Im w)^2 / Im tau
    CHECK(std::abs(jt.value() - cplx(want)) < 1e-12);
    // lambda0 = d^2 phi / dw dwbar = pi / Im tau
    CHECK(std::abs(jt.d2(1, 1) - cplx(theta.facts.at("lambda0_at_tau_i"))) < 1e-11);
}
