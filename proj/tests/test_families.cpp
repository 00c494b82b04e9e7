// Families of fiber metrics from a single potential: geodesic curvature,
// Kodaira-Spencer representatives, and the transport identity. Oracles are
// hand computations frozen in the assertions: the theta-family cancellation
// c(phi) = 0, its constant mu = i/(2 Im tau), and the hyperbolic fiber where
// e^phi = det phi exactly.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "bundlecurv/families.hpp"
#include "bundlecurv/rng.hpp"

using namespace bundlecurv;

namespace {

FiberFamily theta_family() { return FiberFamily::from_catalog(catalog_entry("theta_family")); }

FiberFamily product_family() { return FiberFamily::from_string(1, "abs2(z1) + abs2(v1)"); }

// z-independent hyperbolic fiber; the log 2 offset makes e^phi = det phi
// hold exactly, not just up to a constant.
FiberFamily hyperbolic_family() { return FiberFamily::from_string(1, "-2*log(1 - abs2(v1)) + log(2)"); }

}  // namespace

TEST_CASE("geodesic curvature of the product potential is the identity") {
    const FiberFamily fam = product_family();
    Rng rng(31);
    for (int t = 0; t < 5; ++t) {
        const std::vector<cplx> z{rng.complex_in_box(1.5)};
        const GeodesicCurvature gc = geodesic_curvature(fam, z, rng.complex_in_box(1.5));
        CHECK(std::abs(gc.c(0, 0) - cplx(1.0, 0.0)) < 1e-12);
        CHECK(gc.hermitian_defect < 1e-14);
        CHECK(gc.decomposition_defect < 1e-10);
    }
}

TEST_CASE("geodesic curvature of the theta family cancels identically") {
    const FiberFamily fam = theta_family();
    // phi_{tau taubar} = pi (Im w)^2 / (Im tau)^3 is exactly eaten by
    // |phi_{tau wbar}|^2 / phi_{w wbar}.
    for (const cplx tau : {cplx(0.0, 1.0), cplx(1.0, 1.0), cplx(0.5, 0.8), cplx(0.0, 2.0)}) {
        for (const cplx w : {cplx(0.3, 0.2), cplx(-0.4, 0.7), cplx(0.1, -0.5)}) {
            const std::vector<cplx> z{tau};
            const GeodesicCurvature gc = geodesic_curvature(fam, z, w);
            INFO("tau = " << tau << ", w = " << w);
            CHECK(std::abs(gc.c(0, 0)) < 1e-10);
            CHECK(gc.decomposition_defect < 1e-8);
        }
    }
}

TEST_CASE("geodesic curvature rejects fiberwise-degenerate potentials") {
    const FiberFamily bad = FiberFamily::from_string(1, "-abs2(v1)");
    const std::vector<cplx> z{cplx(0.1, 0.2)};
    CHECK_THROWS_AS(geodesic_curvature(bad, z, cplx(0.3, 0.0)), MetricNotPositive);
    CHECK_THROWS_AS(kodaira_spencer(bad, z, cplx(0.3, 0.0)), MetricNotPositive);
}

TEST_CASE("Kodaira-Spencer representative of the theta family is i/(2 Im tau)") {
    const FiberFamily fam = theta_family();
    for (const cplx tau : {cplx(0.0, 1.0), cplx(0.0, 2.0), cplx(1.0, 1.0), cplx(0.5, 0.8)}) {
        const double b = tau.imag();
        for (const cplx w : {cplx(0.2, 0.4), cplx(-0.3, -0.1)}) {
            const std::vector<cplx> z{tau};
            const KodairaSpencerTensor ks = kodaira_spencer(fam, z, w);
            INFO("tau = " << tau << ", w = " << w);
            CHECK(std::abs(ks.mu(0) - cplx(0.0, 1.0 / (2.0 * b))) < 1e-10);
            CHECK(ks.pointwise_norm_sq(0) == Catch::Approx(1.0 / (4.0 * b * b)).margin(1e-10));
            CHECK(ks.closedness_residual == 0.0);
        }
    }
}

TEST_CASE("Kodaira-Spencer vanishes for split and z-independent families") {
    const std::vector<cplx> z{cplx(0.4, -0.3)};
    CHECK(kodaira_spencer(product_family(), z, cplx(0.2, 0.5)).mu.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(kodaira_spencer(hyperbolic_family(), z, cplx(0.3, 0.1)).mu.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("transport identity holds for the product potential; the germ gate correctly fails at 0") {
    const FiberFamily fam = product_family();

    SECTION("generic point") {
        const std::vector<cplx> z{cplx(0.7, -0.2)};
        const FamilyIdentityReport rep = schumacher_identity_check(fam, z, cplx(0.4, 0.3));
        CHECK(rep.proof_identity.pass);
        CHECK_FALSE(rep.einstein_gate);
        CHECK_FALSE(rep.full_conclusion.has_value());
    }

    SECTION("at the origin e^phi = det phi holds pointwise but not as a germ") {
        // (1 + box) c = 1 while (mu, mu) = 0 here, so admitting the pointwise
        // match would assert a false conclusion; the second-order gate must
        // refuse it.
        const std::vector<cplx> z{cplx{}};
        const FamilyIdentityReport rep = schumacher_identity_check(fam, z, cplx{});
        CHECK(rep.proof_identity.pass);
        CHECK_FALSE(rep.einstein_gate);
        CHECK(rep.gate_residual > 0.5);
        CHECK_FALSE(rep.full_conclusion.has_value());
    }
}

TEST_CASE("transport identity for the theta family balances two nonzero sides") {
    // c(phi) = 0 makes the left side vanish; on the right the log-det
    // curvature 1/(4 Im^2 tau) must exactly cancel |mu|^2.
    const FiberFamily fam = theta_family();
    for (const cplx tau : {cplx(0.0, 1.0), cplx(1.0, 1.0), cplx(0.5, 0.8)}) {
        const std::vector<cplx> z{tau};
        const FamilyIdentityReport rep = schumacher_identity_check(fam, z, cplx(0.25, -0.35));
        INFO("tau = " << tau);
        CHECK(rep.proof_identity.pass);
        CHECK_FALSE(rep.einstein_gate);  // e^phi is w-dependent, det phi is not
        CHECK_FALSE(rep.full_conclusion.has_value());
    }
}

TEST_CASE("hyperbolic fiber satisfies the germ gate and the full conclusion") {
    const FiberFamily fam = hyperbolic_family();
    for (const cplx w : {cplx{}, cplx(0.3, 0.1), cplx(-0.2, 0.4)}) {
        const std::vector<cplx> z{cplx(0.6, -0.4)};  // irrelevant to the potential
        const FamilyIdentityReport rep = schumacher_identity_check(fam, z, w);
        INFO("w = " << w);
        CHECK(rep.proof_identity.pass);
        CHECK(rep.einstein_gate);
        CHECK(rep.gate_residual < 1e-10);
        REQUIRE(rep.full_conclusion.has_value());
        CHECK(rep.full_conclusion->pass);  // 0 = 0: both c and mu vanish
    }
}

TEST_CASE("transport identity is an identity: random smooth potentials over one and two base variables") {
    SECTION("one base variable, coupled potential") {
        const FiberFamily fam = FiberFamily::from_string(
            1, "abs2(z1) + abs2(v1) + 0.3*abs2(z1)*abs2(v1) + 0.1*(z1*conj(v1) + v1*conj(z1))");
        Rng rng(88);
        for (int t = 0; t < 6; ++t) {
            const std::vector<cplx> z{rng.complex_in_box(0.8)};
            const cplx v = rng.complex_in_box(0.8);
            const FamilyIdentityReport rep = schumacher_identity_check(fam, z, v);
            INFO("trial " << t);
            CHECK(rep.proof_identity.pass);
            const GeodesicCurvature gc = geodesic_curvature(fam, z, v);
            CHECK(gc.hermitian_defect < 1e-12);
        }
    }

    SECTION("two base variables") {
        const FiberFamily fam = FiberFamily::from_string(
            2, "abs2(z1) + 0.5*abs2(z2) + abs2(v1) + 0.2*abs2(z1)*abs2(v1) + 0.1*abs2(z2*v1)");
        const std::vector<cplx> z{cplx(0.4, 0.2), cplx(-0.3, 0.5)};
        const cplx v = cplx(0.25, -0.45);
        const FamilyIdentityReport rep = schumacher_identity_check(fam, z, v);
        CHECK(rep.proof_identity.pass);
        const GeodesicCurvature gc = geodesic_curvature(fam, z, v);
        CHECK(gc.c.rows() == 2);
        CHECK(gc.hermitian_defect < 1e-12);
        CHECK(gc.decomposition_defect < 1e-8);
        const KodairaSpencerTensor ks = kodaira_spencer(fam, z, v);
        CHECK(ks.mu.size() == 2);
    }
}

TEST_CASE("family construction validates its inputs") {
    CHECK_THROWS_AS(FiberFamily::from_string(0, "abs2(v1)"), ShapeMismatch);
    CHECK_THROWS_AS(FiberFamily::from_catalog(catalog_entry("o_minus_one")), ConfigError);
    CHECK_THROWS_AS(FiberFamily::from_catalog(catalog_entry("poincare")), ConfigError);
    const FiberFamily fam = theta_family();
    const std::vector<cplx> wrong{cplx{}, cplx{}};
    CHECK_THROWS_AS(geodesic_curvature(fam, wrong, cplx{}), ShapeMismatch);
}
