// Jet arithmetic and the two derivative routes, checked against a test-local
// symbolic differentiation oracle and closed forms.

#include <catch2/catch_amalgamated.hpp>

#include <complex>
#include <limits>
#include <map>
#include <vector>

#include "bundlecurv/fields.hpp"
#include "bundlecurv/jet.hpp"
#include "bundlecurv/rng.hpp"
#include "bundlecurv/wirtinger.hpp"

using namespace bundlecurv;

namespace {

// ------------------------------------------------------------------
// Independent oracle: dense polynomials in (z_1..z_m, zbar_1..zbar_m) with
// explicit symbolic differentiation. Exponent vectors follow the jet-space
// layout: slots [0,m) holomorphic, [m,2m) antiholomorphic.
struct Poly {
    int m = 1;
    std::map<std::vector<int>, cplx> terms;

    cplx eval(std::span<const cplx> p) const {
        cplx acc = 0.0;
        for (const auto& [e, c] : terms) {
            cplx t = c;
            for (int v = 0; v < m; ++v) {
                for (int k = 0; k < e[static_cast<std::size_t>(v)]; ++k) t *= p[static_cast<std::size_t>(v)];
                for (int k = 0; k < e[static_cast<std::size_t>(v + m)]; ++k) t *= std::conj(p[static_cast<std::size_t>(v)]);
            }
            acc += t;
        }
        return acc;
    }

    // d/dz_v (anti=false) or d/dzbar_v (anti=true), term by term.
    Poly derivative(int v, bool anti) const {
        Poly out;
        out.m = m;
        const int slot = anti ? v + m : v;
        for (const auto& [e, c] : terms) {
            if (e[static_cast<std::size_t>(slot)] == 0) continue;
            std::vector<int> d = e;
            d[static_cast<std::size_t>(slot)] -= 1;
            out.terms[d] += c * static_cast<double>(e[static_cast<std::size_t>(slot)]);
        }
        return out;
    }

    Poly deriv_multi(std::span<const int> holo, std::span<const int> anti) const {
        Poly cur = *this;
        for (int v = 0; v < m; ++v) {
            for (int k = 0; k < holo[static_cast<std::size_t>(v)]; ++k) cur = cur.derivative(v, false);
            for (int k = 0; k < anti[static_cast<std::size_t>(v)]; ++k) cur = cur.derivative(v, true);
        }
        return cur;
    }

    Jet eval_jet(std::span<const Jet> vars) const {
        Jet acc = Jet::constant(vars[0].space(), 0.0);
        for (const auto& [e, c] : terms) {
            Jet t = Jet::constant(vars[0].space(), c);
            for (int v = 0; v < m; ++v) {
                if (e[static_cast<std::size_t>(v)] > 0) t = t * vars[static_cast<std::size_t>(v)].pow_int(e[static_cast<std::size_t>(v)]);
                if (e[static_cast<std::size_t>(v + m)] > 0)
                    t = t * vars[static_cast<std::size_t>(v)].conj().pow_int(e[static_cast<std::size_t>(v + m)]);
            }
            acc += t;
        }
        return acc;
    }

    cplxld eval_ld(std::span<const cplxld> p) const {
        cplxld acc = 0.0L;
        for (const auto& [e, c] : terms) {
            cplxld t(static_cast<long double>(c.real()), static_cast<long double>(c.imag()));
            for (int v = 0; v < m; ++v) {
                for (int k = 0; k < e[static_cast<std::size_t>(v)]; ++k) t *= p[static_cast<std::size_t>(v)];
                for (int k = 0; k < e[static_cast<std::size_t>(v + m)]; ++k) t *= std::conj(p[static_cast<std::size_t>(v)]);
            }
            acc += t;
        }
        return acc;
    }
};

Poly random_poly(Rng& rng, int m, int max_deg) {
    Poly p;
    p.m = m;
    std::vector<int> e(static_cast<std::size_t>(2 * m), 0);
    // every exponent vector with total degree <= max_deg gets a coefficient
    // about half the time
    const auto fill = [&](auto&& self, int slot, int budget) -> void {
        if (slot == 2 * m) {
            if (rng.uniform() < 0.5) p.terms[e] = rng.complex_in_box(1.0);
            return;
        }
        for (int k = 0; k <= budget; ++k) {
            e[static_cast<std::size_t>(slot)] = k;
            self(self, slot + 1, budget - k);
        }
        e[static_cast<std::size_t>(slot)] = 0;
    };
    fill(fill, 0, max_deg);
    if (p.terms.empty()) p.terms[std::vector<int>(static_cast<std::size_t>(2 * m), 0)] = 1.0;
    return p;
}

}  // namespace

TEST_CASE("jet space: enumeration, conjugation, raising") {
    auto sp = JetSpace::get(1, 4);
    CHECK(sp->size() == 15);  // monomials z^a zbar^b with a+b <= 4
    auto sp22 = JetSpace::get(2, 2);
    CHECK(sp22->size() == 15);  // 4 slots, total degree <= 2

    for (int i = 0; i < sp22->size(); ++i) {
        CHECK(sp22->index_of(sp22->exponent(i)) == i);
        CHECK(sp22->conj_index(sp22->conj_index(i)) == i);
        for (int s = 0; s < 4; ++s) {
            const int r = sp22->raise_index(i, s);
            if (r >= 0) {
                auto up = sp22->exponent(i);
                up[static_cast<std::size_t>(s)]++;
                CHECK(sp22->exponent(r) == up);
            }
        }
    }

    // factorial product of z^2 zbar^1 is 2! * 1! = 2
    auto sp14 = JetSpace::get(1, 4);
    std::vector<std::uint8_t> e = {2, 1};
    const int idx = sp14->index_of(e);
    REQUIRE(idx >= 0);
    CHECK(sp14->factorial_product(idx) == 2.0);

    CHECK_THROWS_AS(JetSpace::get(0, 2), ShapeMismatch);
    CHECK_THROWS_AS(JetSpace::get(1, 7), ShapeMismatch);
}

TEST_CASE("polynomial jets match the symbolic differentiation oracle") {
    Rng rng(42);
    for (int m : {1, 2}) {
        const int order = (m == 1) ? 4 : 3;
        auto sp = JetSpace::get(m, order);
        for (int trial = 0; trial < 8; ++trial) {
            Poly poly = random_poly(rng, m, order);
            std::vector<cplx> p;
            for (int v = 0; v < m; ++v) p.push_back(rng.complex_in_box(1.5));

            std::vector<Jet> vars;
            for (int v = 0; v < m; ++v) vars.push_back(Jet::variable(sp, v, p[static_cast<std::size_t>(v)]));
            const Jet j = poly.eval_jet(vars);

            for (int i = 0; i < sp->size(); ++i) {
                const auto& exp = sp->exponent(i);
                std::vector<int> holo(exp.begin(), exp.begin() + m);
                std::vector<int> anti(exp.begin() + m, exp.end());
                const cplx want = poly.deriv_multi(holo, anti).eval(p);
                const cplx got = j.deriv(holo, anti);
                CAPTURE(m, trial, i);
                CHECK(std::abs(got - want) < 1e-10 * std::max(1.0, std::abs(want)));
            }
        }
    }
}

TEST_CASE("closed form: derivatives of exp(a z + b zbar)") {
    const cplx a(0.7, -0.3), b(-0.4, 0.55);
    const cplx p(0.25, -0.6);
    auto f = make_field(
        1,
        [&](std::span<const Jet> v) { return (v[0] * a + v[0].conj() * b).exp(); },
        [&](std::span<const cplxld> v) {
            const cplxld al(a.real(), a.imag()), bl(b.real(), b.imag());
            return std::exp(al * v[0] + bl * std::conj(v[0]));
        });
    const Jet j = dual_jet(*f, std::vector<cplx>{p}, 4);
    const cplx f0 = std::exp(a * p + b * std::conj(p));
    for (int al = 0; al + 0 <= 4; ++al) {
        for (int be = 0; al + be <= 4; ++be) {
            cplx want = f0;
            for (int k = 0; k < al; ++k) want *= a;
            for (int k = 0; k < be; ++k) want *= b;
            std::vector<int> h = {al}, an = {be};
            CHECK(std::abs(j.deriv(h, an) - want) < 1e-12 * std::abs(want));
        }
    }
}

TEST_CASE("closed form: complex Hessian of log(1 + |z|^2)") {
    auto f = make_field(
        1, [](std::span<const Jet> v) { return (1.0 + v[0].abs2()).log(); },
        [](std::span<const cplxld> v) { return std::log(1.0L + std::norm(v[0])); });
    for (const cplx p : {cplx(0.0, 0.0), cplx(0.3, -0.2), cplx(-1.1, 0.7)}) {
        const Jet j = dual_jet(*f, std::vector<cplx>{p}, 2);
        const double s = 1.0 + std::norm(p);
        CHECK(std::abs(j.d2(0, 0) - cplx(1.0 / (s * s))) < 1e-13);
        CHECK(std::abs(j.d1(0, false) - std::conj(p) / s) < 1e-13);
    }
}

TEST_CASE("jet algebra round trips: inverse, log/exp, truncation") {
    Rng rng(7);
    auto sp = JetSpace::get(2, 3);
    Poly poly = random_poly(rng, 2, 3);
    poly.terms[std::vector<int>(4, 0)] = cplx(2.5, 0.4);  // keep value away from 0
    std::vector<Jet> vars = {Jet::variable(sp, 0, cplx(0.2, 0.1)), Jet::variable(sp, 1, cplx(-0.3, 0.5))};
    const Jet j = poly.eval_jet(vars);

    const Jet one = j * j.inverse();
    CHECK(std::abs(one.value() - cplx(1.0)) < 1e-12);
    CHECK((one - Jet::constant(sp, 1.0)).max_abs_coeff() < 1e-11);

    const Jet back = j.log().exp();
    CHECK((back - j).max_abs_coeff() < 1e-11 * std::max(1.0, j.max_abs_coeff()));

    const Jet t = j.truncated(1);
    CHECK(t.space()->order() == 1);
    CHECK(t.value() == j.value());
    CHECK_THROWS_AS(t.truncated(3), ShapeMismatch);

    CHECK_THROWS_AS(Jet::constant(sp, cplx(1e-14, 0.0)).inverse(), DomainError);
    CHECK_THROWS_AS(Jet::constant(sp, 0.0).log(), DomainError);
}

TEST_CASE("real-valued fields have conjugation-symmetric jets") {
    auto f = make_field(
        1, [](std::span<const Jet> v) { return v[0].abs2() + (v[0] + v[0].conj()).exp(); },
        [](std::span<const cplxld> v) { return std::norm(v[0]) + std::exp(v[0] + std::conj(v[0])); });
    const Jet j = dual_jet(*f, std::vector<cplx>{cplx(0.37, -0.81)}, 4);
    const auto& sp = j.space();
    for (int i = 0; i < sp->size(); ++i)
        CHECK(std::abs(j.coeff(sp->conj_index(i)) - std::conj(j.coeff(i))) < 1e-12);
}

TEST_CASE("derivative() drops to a consistent lower-order jet") {
    Rng rng(11);
    Poly poly = random_poly(rng, 1, 4);
    auto sp = JetSpace::get(1, 4);
    const cplx p(0.6, -0.2);
    const Jet j = poly.eval_jet(std::vector<Jet>{Jet::variable(sp, 0, p)});

    const Poly dz = poly.derivative(0, false);
    const Poly dzb = poly.derivative(0, true);
    auto sp3 = JetSpace::get(1, 3);
    const Jet want_dz = dz.eval_jet(std::vector<Jet>{Jet::variable(sp3, 0, p)});
    const Jet want_dzb = dzb.eval_jet(std::vector<Jet>{Jet::variable(sp3, 0, p)});
    CHECK((j.derivative(0, false) - want_dz).max_abs_coeff() < 1e-11);
    CHECK((j.derivative(0, true) - want_dzb).max_abs_coeff() < 1e-11);
}

TEST_CASE("finite differences reproduce nested-dual jets to 1e-5") {
    // transcendental 2-variable field: log(1 + |v|^2 exp(z + zbar))
    auto f = make_field(
        2,
        [](std::span<const Jet> v) { return (1.0 + v[1].abs2() * (v[0] + v[0].conj()).exp()).log(); },
        [](std::span<const cplxld> v) { return std::log(1.0L + std::norm(v[1]) * std::exp(2.0L * v[0].real())); });
    const std::vector<cplx> p = {cplx(0.15, -0.4), cplx(0.8, 0.3)};

    const Jet a = dual_jet(*f, p, 4);
    const Jet b = fd_jet(*f, p, 4, 1e-3, false);
    const auto& sp = a.space();
    for (int i = 0; i < sp->size(); ++i) {
        const double fa = sp->factorial_product(i);
        const cplx da = a.coeff(i) * fa, db = b.coeff(i) * fa;
        CAPTURE(i);
        CHECK(std::abs(da - db) <= 1e-5 * std::max({1.0, std::abs(da), std::abs(db)}));
    }

    // cross-check mode returns the dual jet without throwing
    DiffConfig cfg;
    const Jet c = wirtinger_jet(*f, p, 4, cfg);
    CHECK((c - a).max_abs_coeff() == 0.0);

    // Richardson refinement still agrees
    DiffConfig rich;
    rich.mode = DiffMode::FiniteDifference;
    rich.richardson = true;
    const Jet r = wirtinger_jet(*f, p, 3, rich);
    for (int i = 0; i < r.space()->size(); ++i) {
        const double fa = r.space()->factorial_product(i);
        CHECK(std::abs(r.coeff(i) - a.truncated(3).coeff(i)) * fa <=
              1e-6 * std::max(1.0, std::abs(a.truncated(3).coeff(i)) * fa));
    }
}

TEST_CASE("cross-check rejects an inconsistent field") {
    // jet path computes |z|^2, the pointwise path |z|^2 + 1e-3 z
    auto f = make_field(
        1, [](std::span<const Jet> v) { return v[0].abs2(); },
        [](std::span<const cplxld> v) { return std::norm(v[0]) + 1e-3L * v[0]; });
    DiffConfig cfg;
    CHECK_THROWS_AS(wirtinger_jet(*f, std::vector<cplx>{cplx(0.5, 0.2)}, 2, cfg), CrossCheckMismatch);
}

TEST_CASE("configuration and degenerate inputs are rejected") {
    DiffConfig bad;
    bad.fd_step = 1e-7;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad.fd_step = 0.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    auto f = make_field(
        1, [](std::span<const Jet> v) { return v[0]; },
        [](std::span<const cplxld>) { return cplxld(std::numeric_limits<long double>::infinity(), 0.0L); });
    CHECK_THROWS_AS(fd_jet(*f, std::vector<cplx>{cplx(0.0, 0.0)}, 1, 1e-3, false), NonFiniteValue);

    auto g = make_field(
        1, [](std::span<const Jet> v) { return Jet::constant(v[0].space(), cplx(std::numeric_limits<double>::quiet_NaN(), 0.0)); },
        [](std::span<const cplxld>) { return cplxld(0.0L, 0.0L); });
    CHECK_THROWS_AS(dual_jet(*g, std::vector<cplx>{cplx(0.0, 0.0)}, 1), NonFiniteValue);

    DiffConfig cfg;
    auto h = make_field(
        2, [](std::span<const Jet> v) { return v[0] + v[1]; },
        [](std::span<const cplxld> v) { return v[0] + v[1]; });
    CHECK_THROWS_AS(wirtinger_jet(*h, std::vector<cplx>{cplx(0.0, 0.0)}, 2, cfg), ShapeMismatch);

    auto sp2 = JetSpace::get(1, 2);
    auto sp3 = JetSpace::get(1, 3);
    CHECK_THROWS_AS(Jet::constant(sp2, 1.0) + Jet::constant(sp3, 1.0), ShapeMismatch);
}

TEST_CASE("deterministic rng") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng c(42);
    for (int i = 0; i < 1000; ++i) {
        const double u = c.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    Rng d(1);
    auto v = d.unit_vector(4);
    double n2 = 0.0;
    for (const auto& x : v) n2 += std::norm(x);
    CHECK(std::abs(n2 - 1.0) < 1e-12);
}
