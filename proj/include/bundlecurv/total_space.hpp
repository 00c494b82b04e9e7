#pragma once

// Kähler geometry on the total space of a Hermitian bundle. Given a bundle
// metric G_{ij̄}(z) and a base potential ψ(z), the scalar field
//
//     Φ(z, v) = ψ(z) + G(z, v),   G(z, v) = G_{ij̄}(z) v^i v̄^j,
//
// defines the (1,1)-form Ω = i∂∂̄Φ = π*ω + i∂∂̄G. This header builds Ω, its
// horizontal/vertical frame decomposition, the full Chern curvature of Ω via
// two independent routes (structured curvature blocks vs. order-4 jets of the
// potential), the tautological-section pairing, a bounded primitive one-form,
// and the Ricci form of Ω.
//
// Index conventions follow bundle_geometry.hpp: for any metric matrix
// M(row a, col b) = M_{ab̄}, the inverse entries are M^{b̄c} = (M⁻¹)(b, c), so
// Σ_b M_{ab̄} M^{b̄c} = δ_a^c. A (1,1)-form C_{μν̄} dζ^μ∧dζ̄^ν evaluates on
// vectors as C(X, Ȳ) = Σ C_{μν̄} X^μ Ȳ^ν, and ∂̄(f_μ dζ^μ) contributes
// -∂_ν̄ f_μ to the dζ^μ∧dζ̄^ν coefficient.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bundlecurv/bundle_geometry.hpp"
#include "bundlecurv/check.hpp"
#include "bundlecurv/errors.hpp"
#include "bundlecurv/expr.hpp"
#include "bundlecurv/jet.hpp"
#include "bundlecurv/tensor.hpp"
#include "bundlecurv/threading.hpp"
#include "bundlecurv/wirtinger.hpp"

namespace bundlecurv {

/// A point of the total space: base coordinates z and fiber coefficients v.
struct TotalPoint {
    std::vector<cplx> z;
    std::vector<cplx> v;

    std::vector<cplx> joined() const {
        std::vector<cplx> q(z);
        q.insert(q.end(), v.begin(), v.end());
        return q;
    }
    bool on_zero_section() const {
        for (const auto& x : v)
            if (x != cplx{}) return false;
        return true;
    }
};

namespace detail {

inline void require_point(const BundleMetric& G, const TotalPoint& p) {
    if (static_cast<int>(p.z.size()) != G.base_dim || static_cast<int>(p.v.size()) != G.rank)
        throw ShapeMismatch("total-space point does not match the bundle dimensions");
}

/// Re-express a jet in the base variables as a jet over (z, v) with inert
/// fiber slots. Taylor coefficients are unchanged.
inline Jet embed_base_jet(const std::shared_ptr<const JetSpace>& target, const Jet& src, int n_base) {
    const auto& ssp = src.space();
    if (ssp->nvars() != n_base || target->nvars() < n_base)
        throw ShapeMismatch("embed_base_jet: variable counts are incompatible");
    if (ssp->order() != target->order()) throw ShapeMismatch("embed_base_jet: order mismatch");
    const int m = target->nvars();
    Jet out = Jet::constant(target, 0.0);
    std::vector<std::uint8_t> e(static_cast<std::size_t>(2 * m), 0);
    for (int i = 0; i < ssp->size(); ++i) {
        const auto& se = ssp->exponent(i);
        std::fill(e.begin(), e.end(), 0);
        for (int k = 0; k < n_base; ++k) {
            e[static_cast<std::size_t>(k)] = se[static_cast<std::size_t>(k)];
            e[static_cast<std::size_t>(k + m)] = se[static_cast<std::size_t>(k + n_base)];
        }
        out.coeff(target->index_of(e)) = src.coeff(i);
    }
    return out;
}

/// The fiberwise norm G(z,v) = Σ G_{ij̄}(z) v^i v̄^j as one expression over (n, r).
inline ExprAST fiber_norm_ast(const BundleMetric& G) {
    using K = ExprNode::Kind;
    ExprPtr acc;
    for (int i = 0; i < G.rank; ++i)
        for (int j = 0; j < G.rank; ++j) {
            ExprPtr term = ExprNode::binary(
                K::Mul,
                ExprNode::binary(K::Mul, G.entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].root(),
                                 ExprNode::var_node(true, i)),
                ExprNode::unary(K::Conj, ExprNode::var_node(true, j)));
            acc = acc ? ExprNode::binary(K::Add, std::move(acc), std::move(term)) : std::move(term);
        }
    return ExprAST(std::move(acc), G.base_dim, G.rank);
}

/// Φ(z,v) = ψ(z) + G(z,v) over (n, r).
inline ExprAST total_potential_ast(const BundleMetric& G, const BaseMetric& g) {
    if (g.dim != G.base_dim) throw ShapeMismatch("base potential dimension does not match the bundle");
    ExprAST fib = fiber_norm_ast(G);
    return ExprAST(ExprNode::binary(ExprNode::Kind::Add, g.potential.root(), fib.root()), G.base_dim, G.rank);
}

/// ψ(z) + (1/2) Σ_a |z_a|^4: a second Kähler potential used to confirm
/// metric-independence claims (its Hessian gains the PSD term 2|z_a|^2 δ_ab).
inline BaseMetric augmented_base(const BaseMetric& g) {
    using K = ExprNode::Kind;
    ExprPtr bump;
    for (int a = 0; a < g.dim; ++a) {
        ExprPtr t = ExprNode::unary(K::Pow, ExprNode::unary(K::Abs2, ExprNode::var_node(false, a)), 2);
        bump = bump ? ExprNode::binary(K::Add, std::move(bump), std::move(t)) : std::move(t);
    }
    bump = ExprNode::binary(K::Mul, ExprNode::literal_node(0.5), std::move(bump));
    return BaseMetric{g.dim, ExprAST(ExprNode::binary(K::Add, g.potential.root(), std::move(bump)), g.dim, 0)};
}

/// Inverse of a small Hermitian positive matrix, with the usual guards.
inline Eigen::MatrixXcd pd_inverse(const Eigen::MatrixXcd& m, const char* what) {
    const EigenResult er = hermitian_eigen(m);
    const double lo = er.values.minCoeff(), hi = er.values.maxCoeff();
    if (lo <= 0.0) throw MetricNotPositive(std::string(what) + ": matrix is not positive definite");
    if (hi > lo * 1e13) throw SingularMetric(std::string(what) + ": matrix is numerically singular");
    return m.inverse();
}

/// ‖θ‖² of a (1,0)-covector θ_μ dζ^μ under the Hermitian metric H_{μν̄}:
/// Σ θ_μ θ̄_ν H^{ν̄μ} = θᴴ H⁻¹ θ. For a (0,1)-covector s_ν̄ dζ̄^ν pass conj(s).
inline double covector_norm_sq(const Eigen::VectorXcd& theta, const Eigen::LDLT<Eigen::MatrixXcd>& solver) {
    return theta.dot(solver.solve(theta)).real();
}

/// Wirtinger first derivative of a pointwise function by 4th-order central
/// differences along the real and imaginary axes of variable `slot`.
template <typename F>
cplx fd_wirtinger_d1(const F& f, std::vector<cplx> q, int slot, double h, bool anti) {
    static constexpr double w[5] = {1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0};
    const cplx base = q[static_cast<std::size_t>(slot)];
    cplx fx{}, fy{};
    for (int k = -2; k <= 2; ++k) {
        if (k == 0) continue;
        q[static_cast<std::size_t>(slot)] = base + cplx(h * k, 0.0);
        fx += w[k + 2] * f(q);
        q[static_cast<std::size_t>(slot)] = base + cplx(0.0, h * k);
        fy += w[k + 2] * f(q);
    }
    fx /= h;
    fy /= h;
    const cplx iu(0.0, 1.0);
    return anti ? 0.5 * (fx + iu * fy) : 0.5 * (fx - iu * fy);
}

inline DiffConfig dual_only() {
    DiffConfig c;
    c.mode = DiffMode::NestedDual;
    return c;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Frame decomposition.

/// Horizontal lifts δ/δz^α = ∂/∂z^α + H^i_α ∂/∂v^i with H^i_α = -G_{αl̄}G^{l̄i},
/// and the dual coframe correction δv^i = dv^i + B^i_α dz^α with B = -H.
/// `horizontal` is computed from second derivatives of the scalar field
/// G(z,v); `coframe` independently from entrywise metric jets on the base.
/// Their residual pairing ⟨δv^i, δ/δz^α⟩ = B^i_α + H^i_α is reported.
struct FrameDecomposition {
    Eigen::MatrixXcd horizontal;  ///< r x n, H^i_α at (i, α)
    Eigen::MatrixXcd coframe;     ///< r x n, B^i_α at (i, α)
    double pairing_defect = 0.0;
};

inline FrameDecomposition frame_decomposition(const BundleMetric& G, const TotalPoint& p,
                                              const DiffConfig& cfg = {}) {
    detail::require_point(G, p);
    const int n = G.base_dim, r = G.rank;
    const std::vector<cplx> q = p.joined();

    const ExprAST phi = detail::fiber_norm_ast(G);
    const Jet pj = wirtinger_jet(*phi.field(), q, 2, cfg);
    Eigen::MatrixXcd fiber(r, r), mixed(n, r);
    for (int i = 0; i < r; ++i)
        for (int l = 0; l < r; ++l) fiber(i, l) = pj.d2(n + i, n + l);
    for (int a = 0; a < n; ++a)
        for (int l = 0; l < r; ++l) mixed(a, l) = pj.d2(a, n + l);
    const Eigen::MatrixXcd inv = detail::pd_inverse(fiber, "fiber metric block");

    FrameDecomposition out;
    out.horizontal = Eigen::MatrixXcd::Zero(r, n);
    for (int i = 0; i < r; ++i)
        for (int a = 0; a < n; ++a)
            for (int l = 0; l < r; ++l) out.horizontal(i, a) -= mixed(a, l) * inv(l, i);

    const JetMat gj = bundle_metric_jets(G, p.z, 1, cfg);
    Eigen::MatrixXcd fiber2(r, r);
    for (int k = 0; k < r; ++k)
        for (int l = 0; l < r; ++l) fiber2(k, l) = gj[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)].value();
    const Eigen::MatrixXcd inv2 = detail::pd_inverse(fiber2, "fiber metric");
    out.coframe = Eigen::MatrixXcd::Zero(r, n);
    for (int i = 0; i < r; ++i)
        for (int a = 0; a < n; ++a)
            for (int k = 0; k < r; ++k)
                for (int l = 0; l < r; ++l)
                    out.coframe(i, a) += gj[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)].d1(a, false) *
                                         p.v[static_cast<std::size_t>(k)] * inv2(l, i);

    out.pairing_defect = (out.coframe + out.horizontal).cwiseAbs().maxCoeff();
    return out;
}

// ---------------------------------------------------------------------------
// The metric Ω in frame blocks.

struct OmegaBlocks {
    Eigen::MatrixXcd base;   ///< Ω_{αβ̄} = Ψ_{αβ̄} + g_{αβ̄}
    Eigen::MatrixXcd fiber;  ///< G_{ij̄}
    Eigen::MatrixXcd psi;    ///< Ψ_{αβ̄} = -R_{ij̄αβ̄} v^i v̄^j
    double min_base_eigenvalue = 0.0;
    FrameDecomposition frame;

    /// Largest coefficient magnitude of Ω in coordinates; tolerance scale.
    double sup_norm() const {
        double m = std::max(base.cwiseAbs().maxCoeff(), fiber.cwiseAbs().maxCoeff());
        return std::max(1.0, m);
    }
};

/// Assemble Ω = π*ω + i∂∂̄G at p from curvature and metric data. With
/// `require_griffiths_negative`, the bundle must certify Griffiths
/// (semi-)negative at z so that Ψ ⪰ 0 and the base block is positive.
inline OmegaBlocks assemble_omega(const BundleMetric& G, const BaseMetric& g, const TotalPoint& p,
                                  const DiffConfig& cfg = {}, bool require_griffiths_negative = true) {
    detail::require_point(G, p);
    if (g.dim != G.base_dim) throw ShapeMismatch("base potential dimension does not match the bundle");
    const int n = G.base_dim, r = G.rank;

    const MultiIndexTensor R = chern_curvature(G, p.z, cfg);
    const Eigen::MatrixXcd gmat = base_metric_matrix(g, p.z, cfg);
    const Eigen::MatrixXcd Gf = bundle_metric_value(G, p.z, cfg);
    if (hermitian_eigen(gmat).values.minCoeff() <= 0.0)
        throw MetricNotPositive("base metric is not positive definite at z");

    if (require_griffiths_negative) {
        const PositivityCertificate cert = griffiths_extremum(R, gmat, Gf);
        if (cert.sign == "positive" || cert.sign == "indefinite")
            throw NotGriffithsNegative("bundle metric is not Griffiths seminegative at z (sign: " + cert.sign + ")");
    }

    OmegaBlocks out;
    out.psi = Eigen::MatrixXcd::Zero(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int i = 0; i < r; ++i)
                for (int j = 0; j < r; ++j)
                    out.psi(a, b) -= R.at({i, j, a, b}) * p.v[static_cast<std::size_t>(i)] *
                                     std::conj(p.v[static_cast<std::size_t>(j)]);
    out.base = out.psi + gmat;
    out.fiber = Gf;
    out.min_base_eigenvalue = hermitian_eigen(out.base).values.minCoeff();
    if (out.min_base_eigenvalue <= 0.0) throw MetricNotPositive("Ω base block is not positive definite at p");
    out.frame = frame_decomposition(G, p, cfg);
    return out;
}

/// Coordinate matrix of Ω from its frame blocks: expand G_{ij̄} δv^i∧δv̄^j and
/// (Ψ+g)_{αβ̄} dz^α∧dz̄^β over (dz, dv).
inline Eigen::MatrixXcd frame_to_coordinates(const OmegaBlocks& ob) {
    const int n = static_cast<int>(ob.base.rows()), r = static_cast<int>(ob.fiber.rows());
    const Eigen::MatrixXcd& B = ob.frame.coframe;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n + r, n + r);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            cplx acc = ob.base(a, b);
            for (int i = 0; i < r; ++i)
                for (int j = 0; j < r; ++j) acc += ob.fiber(i, j) * B(i, a) * std::conj(B(j, b));
            m(a, b) = acc;
        }
    for (int a = 0; a < n; ++a)
        for (int j = 0; j < r; ++j) {
            cplx acc{};
            for (int i = 0; i < r; ++i) acc += ob.fiber(i, j) * B(i, a);
            m(a, n + j) = acc;
        }
    for (int i = 0; i < r; ++i)
        for (int b = 0; b < n; ++b) {
            cplx acc{};
            for (int j = 0; j < r; ++j) acc += ob.fiber(i, j) * std::conj(B(j, b));
            m(n + i, b) = acc;
        }
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) m(n + i, n + j) = ob.fiber(i, j);
    return m;
}

// ---------------------------------------------------------------------------
// Identity checks on Ω.

/// Verify i∂∂̄G = -R_{ij̄αβ̄}v^iv̄^j dz^α∧dz̄^β + G_{ij̄} δv^i∧δv̄^j by comparing
/// coordinate coefficient matrices: the Hessian of G(z,v) on the left, the
/// curvature/connection assembly on the right.
inline CheckResult decomposition_check(const BundleMetric& G, const TotalPoint& p, const DiffConfig& cfg = {}) {
    detail::require_point(G, p);
    const int n = G.base_dim, r = G.rank, m = n + r;
    const std::vector<cplx> q = p.joined();

    const ExprAST phi = detail::fiber_norm_ast(G);
    const Jet pj = wirtinger_jet(*phi.field(), q, 2, cfg);
    Eigen::MatrixXcd lhs(m, m);
    for (int mu = 0; mu < m; ++mu)
        for (int nu = 0; nu < m; ++nu) lhs(mu, nu) = pj.d2(mu, nu);

    const MultiIndexTensor R = chern_curvature(G, p.z, cfg);
    const Eigen::MatrixXcd Gf = bundle_metric_value(G, p.z, cfg);
    const FrameDecomposition fr = frame_decomposition(G, p, cfg);
    OmegaBlocks ob;
    ob.psi = Eigen::MatrixXcd::Zero(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int i = 0; i < r; ++i)
                for (int j = 0; j < r; ++j)
                    ob.psi(a, b) -= R.at({i, j, a, b}) * p.v[static_cast<std::size_t>(i)] *
                                    std::conj(p.v[static_cast<std::size_t>(j)]);
    ob.base = ob.psi;  // no base form in this identity
    ob.fiber = Gf;
    ob.frame = fr;
    const Eigen::MatrixXcd rhs = frame_to_coordinates(ob);

    const double scale = std::max(1.0, lhs.cwiseAbs().maxCoeff());
    const double value = (lhs - rhs).cwiseAbs().maxCoeff();
    return CheckResult::against("omega-decomposition", value, 0.0, 1e-7 * scale, "jet-hessian",
                                "Hessian of the fiber norm vs curvature/connection frame assembly");
}

/// Verify that the frame-block assembly of Ω agrees with i∂∂̄(ψ + G) computed
/// directly by order-2 jets in all n+r variables.
inline CheckResult potential_crosscheck(const BundleMetric& G, const BaseMetric& g, const TotalPoint& p,
                                        const DiffConfig& cfg = {}) {
    detail::require_point(G, p);
    const int m = G.base_dim + G.rank;
    const std::vector<cplx> q = p.joined();

    const ExprAST Phi = detail::total_potential_ast(G, g);
    const Jet tj = wirtinger_jet(*Phi.field(), q, 2, cfg);
    Eigen::MatrixXcd direct(m, m);
    for (int mu = 0; mu < m; ++mu)
        for (int nu = 0; nu < m; ++nu) direct(mu, nu) = tj.d2(mu, nu);

    const OmegaBlocks ob = assemble_omega(G, g, p, cfg, /*require_griffiths_negative=*/false);
    const Eigen::MatrixXcd assembled = frame_to_coordinates(ob);

    const double scale = std::max(1.0, direct.cwiseAbs().maxCoeff());
    const double value = (direct - assembled).cwiseAbs().maxCoeff() / scale;
    return CheckResult::against("omega-potential-crosscheck", value, 0.0, 1e-6, "jet-hessian",
                                "order-2 jets of the total potential vs frame-block assembly");
}

/// Verify ‖∂G‖²_Ω = G(z,v): the squared Ω-norm of the (1,0)-form ∂G equals
/// the fiberwise norm itself, independently of the base potential. The norm
/// is evaluated in coordinates through the full (n+r)² metric matrix, once
/// for ψ and once for a perturbed potential.
inline CheckResult dG_norm_check(const BundleMetric& G, const BaseMetric& g, const TotalPoint& p,
                                 const DiffConfig& cfg = {}) {
    detail::require_point(G, p);
    const int m = G.base_dim + G.rank;
    const std::vector<cplx> q = p.joined();

    const ExprAST phi = detail::fiber_norm_ast(G);
    const Jet pj = wirtinger_jet(*phi.field(), q, 2, cfg);
    Eigen::VectorXcd theta(m);
    for (int mu = 0; mu < m; ++mu) theta(mu) = pj.d1(mu, false);
    const double oracle = pj.value().real();

    const auto norm_under = [&](const BaseMetric& base) {
        const ExprAST Phi = detail::total_potential_ast(G, base);
        const Jet tj = wirtinger_jet(*Phi.field(), q, 2, cfg);
        Eigen::MatrixXcd H(m, m);
        for (int mu = 0; mu < m; ++mu)
            for (int nu = 0; nu < m; ++nu) H(mu, nu) = tj.d2(mu, nu);
        if (hermitian_eigen(H).values.minCoeff() <= 0.0)
            throw MetricNotPositive("Ω is not positive definite at p");
        return detail::covector_norm_sq(theta, H.ldlt());
    };

    const double v1 = norm_under(g);
    const double v2 = norm_under(detail::augmented_base(g));

    const double denom = std::max(1.0, std::abs(oracle));
    CheckResult r;
    r.check = "dG-norm-identity";
    r.value = v1;
    r.oracle = oracle;
    r.tolerance = 1e-8 * denom;
    r.margin = r.tolerance - std::max(std::abs(v1 - oracle), std::abs(v2 - oracle));
    r.pass = std::isfinite(v1) && std::isfinite(v2) && r.margin >= 0.0;
    r.provenance = "closed-form";
    r.details = "second base potential gives " + std::to_string(v2);
    return r;
}

// ---------------------------------------------------------------------------
// Bounded primitive of Ω.

/// A one-form on the base chart, β = Σ holo[a] dz^a + Σ anti[a] dz̄^a, with
/// components given as expressions in z. Used as an explicit primitive of ω.
struct BasePrimitive {
    std::vector<ExprAST> holo;
    std::vector<ExprAST> anti;

    static BasePrimitive from_strings(int n, const std::vector<std::string>& holo_texts,
                                      const std::vector<std::string>& anti_texts) {
        if (static_cast<int>(holo_texts.size()) != n || static_cast<int>(anti_texts.size()) != n)
            throw ShapeMismatch("base primitive needs one component per base variable and type");
        BasePrimitive b;
        for (const auto& s : holo_texts) b.holo.push_back(parse_expr(s, n, 0));
        for (const auto& s : anti_texts) b.anti.push_back(parse_expr(s, n, 0));
        return b;
    }
};

/// Deterministic lattice over the real/imaginary axes of every variable.
struct GridSpec {
    int points_per_axis = 3;  ///< lattice points per real axis (>= 1)
    double z_halfwidth = 0.5;
    double v_halfwidth = 1.0;
};

struct PrimitiveReport {
    CheckResult precondition;   ///< dβ = ω on the base grid
    CheckResult closure;        ///< dη = Ω on the total-space grid
    CheckResult norm_identity;  ///< ‖∂G‖²_Ω = G, and G ≤ R inside S_R
    double sup_eta_norm = 0.0;  ///< sup over the grid of ‖η‖_Ω
    double radius = 4.0;        ///< R defining the disk bundle S_R = {G < R}
    bool pass() const { return precondition.pass && closure.pass && norm_identity.pass; }
};

/// Exhibit the bounded primitive η = i∂̄G + π*β of Ω and verify dη = Ω on a
/// grid by finite-difference exterior differentiation. (The (1,0)-form ∂G
/// itself is *not* a primitive: d(∂G) = ∂̄∂G = -∂∂̄G, off by a factor of -i
/// from i∂∂̄G. Its conjugate partner i∂̄G closes the gap and carries the same
/// pointwise norm, ‖i∂̄G‖²_Ω = ‖∂G‖²_Ω = G, so boundedness on disk bundles is
/// unchanged.) Also verifies dβ = ω and the norm identity on the grid.
inline PrimitiveReport primitive_check(const BundleMetric& G, const BaseMetric& g, const BasePrimitive& beta,
                                       const GridSpec& grid = {}, double radius = 4.0,
                                       const DiffConfig& cfg = detail::dual_only(), int threads = 0) {
    if (static_cast<int>(beta.holo.size()) != G.base_dim || static_cast<int>(beta.anti.size()) != G.base_dim)
        throw ShapeMismatch("base primitive dimension does not match the bundle");
    if (grid.points_per_axis < 1) throw ConfigError("grid: points_per_axis must be >= 1");
    const int n = G.base_dim, r = G.rank, m = n + r;
    const double fd_step = 1e-3;

    const ExprAST phi = detail::fiber_norm_ast(G);
    const ExprAST Phi = detail::total_potential_ast(G, g);
    const auto phi_field = phi.field();
    const auto Phi_field = Phi.field();
    const cplx iu(0.0, 1.0);

    const auto axis_value = [&](int k, int per, double w) -> double {
        return per == 1 ? 0.0 : -w + 2.0 * w * k / (per - 1);
    };
    const auto beta_comp = [&](const ExprAST& c, std::span<const cplx> q) -> cplx {
        std::vector<cplxld> zl(static_cast<std::size_t>(n));
        for (int a = 0; a < n; ++a) zl[static_cast<std::size_t>(a)] = q[static_cast<std::size_t>(a)];
        const cplxld val = c.eval_scalar(zl);
        return {static_cast<double>(val.real()), static_cast<double>(val.imag())};
    };

    // --- precondition: dβ = ω over the base lattice -------------------------
    const int per = grid.points_per_axis;
    std::size_t base_total = 1;
    for (int k = 0; k < 2 * n; ++k) base_total *= static_cast<std::size_t>(per);
    std::vector<double> pre_defect(base_total, 0.0), pre_scale(base_total, 0.0);
    parallel_for(base_total, resolve_threads(threads), [&](std::size_t pt) {
        std::size_t code = pt;
        std::vector<cplx> z(static_cast<std::size_t>(n));
        for (int a = 0; a < n; ++a) {
            const int kx = static_cast<int>(code % static_cast<std::size_t>(per));
            code /= static_cast<std::size_t>(per);
            const int ky = static_cast<int>(code % static_cast<std::size_t>(per));
            code /= static_cast<std::size_t>(per);
            z[static_cast<std::size_t>(a)] = cplx(axis_value(kx, per, grid.z_halfwidth),
                                                  axis_value(ky, per, grid.z_halfwidth));
        }
        const Jet psij = wirtinger_jet(*g.potential.field(), z, 2, cfg);
        const auto bmu = [&](int a2) {
            return [&, a2](const std::vector<cplx>& zz) { return beta_comp(beta.holo[static_cast<std::size_t>(a2)], zz); };
        };
        const auto cmu = [&](int a2) {
            return [&, a2](const std::vector<cplx>& zz) { return beta_comp(beta.anti[static_cast<std::size_t>(a2)], zz); };
        };
        double defect = 0.0, scale = 0.0;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                const cplx omega_ab = iu * psij.d2(a, b);
                scale = std::max(scale, std::abs(omega_ab));
                // (1,1): ∂_a c_b̄ - ∂_b̄ b_a = i g_{ab̄}
                const cplx d11 = detail::fd_wirtinger_d1(cmu(b), z, a, fd_step, false) -
                                 detail::fd_wirtinger_d1(bmu(a), z, b, fd_step, true);
                defect = std::max(defect, std::abs(d11 - omega_ab));
                // (2,0): ∂_a b_b - ∂_b b_a = 0 ; (0,2): ∂_ā c_b̄ - ∂_b̄ c_ā = 0
                const cplx d20 = detail::fd_wirtinger_d1(bmu(b), z, a, fd_step, false) -
                                 detail::fd_wirtinger_d1(bmu(a), z, b, fd_step, false);
                const cplx d02 = detail::fd_wirtinger_d1(cmu(b), z, a, fd_step, true) -
                                 detail::fd_wirtinger_d1(cmu(a), z, b, fd_step, true);
                defect = std::max(defect, std::max(std::abs(d20), std::abs(d02)));
            }
        pre_defect[pt] = defect;
        pre_scale[pt] = scale;
    });
    double pre_worst = 0.0, pre_sup = 0.0;
    for (std::size_t i = 0; i < base_total; ++i) {
        pre_worst = std::max(pre_worst, pre_defect[i]);
        pre_sup = std::max(pre_sup, pre_scale[i]);
    }

    PrimitiveReport rep;
    rep.radius = radius;
    rep.precondition = CheckResult::against("primitive-precondition", pre_worst, 0.0,
                                            1e-7 * std::max(1.0, pre_sup), "finite-difference",
                                            "exterior derivative of β vs i∂∂̄ψ on the base grid");

    // --- closure and norms over the total-space lattice ---------------------
    std::size_t total = 1;
    for (int k = 0; k < 2 * m; ++k) total *= static_cast<std::size_t>(per);
    struct PointStats {
        double closure = 0.0, scale = 0.0, norm_rel = 0.0, eta = 0.0;
        bool disk_ok = true;
    };
    std::vector<PointStats> stats(total);

    // η components as pointwise functions of the joined coordinates.
    const auto a_comp = [&](int mu) {
        return [&, mu](const std::vector<cplx>& q) -> cplx {
            return mu < n ? beta_comp(beta.holo[static_cast<std::size_t>(mu)], std::span<const cplx>(q).first(
                                                                                   static_cast<std::size_t>(n)))
                          : cplx{};
        };
    };
    const auto s_comp = [&](int nu) {
        return [&, nu](const std::vector<cplx>& q) -> cplx {
            const Jet j1 = wirtinger_jet(*phi_field, q, 1, detail::dual_only());
            cplx val = iu * j1.d1(nu, true);
            if (nu < n)
                val += beta_comp(beta.anti[static_cast<std::size_t>(nu)],
                                 std::span<const cplx>(q).first(static_cast<std::size_t>(n)));
            return val;
        };
    };

    parallel_for(total, resolve_threads(threads), [&](std::size_t pt) {
        std::size_t code = pt;
        std::vector<cplx> q(static_cast<std::size_t>(m));
        for (int s = 0; s < m; ++s) {
            const double w = s < n ? grid.z_halfwidth : grid.v_halfwidth;
            const int kx = static_cast<int>(code % static_cast<std::size_t>(per));
            code /= static_cast<std::size_t>(per);
            const int ky = static_cast<int>(code % static_cast<std::size_t>(per));
            code /= static_cast<std::size_t>(per);
            q[static_cast<std::size_t>(s)] = cplx(axis_value(kx, per, w), axis_value(ky, per, w));
        }
        PointStats st;

        const Jet tj = wirtinger_jet(*Phi_field, q, 2, cfg);
        Eigen::MatrixXcd H(m, m);
        for (int mu = 0; mu < m; ++mu)
            for (int nu = 0; nu < m; ++nu) H(mu, nu) = tj.d2(mu, nu);
        st.scale = H.cwiseAbs().maxCoeff();

        for (int mu = 0; mu < m; ++mu)
            for (int nu = 0; nu < m; ++nu) {
                // (1,1): ∂_mu s_nū - ∂_nū a_mu  vs  i Φ_{mu nū}
                const cplx d11 = detail::fd_wirtinger_d1(s_comp(nu), q, mu, fd_step, false) -
                                 detail::fd_wirtinger_d1(a_comp(mu), q, nu, fd_step, true);
                st.closure = std::max(st.closure, std::abs(d11 - iu * H(mu, nu)));
                // (2,0) and (0,2) parts of dη must vanish.
                const cplx d20 = detail::fd_wirtinger_d1(a_comp(nu), q, mu, fd_step, false) -
                                 detail::fd_wirtinger_d1(a_comp(mu), q, nu, fd_step, false);
                const cplx d02 = detail::fd_wirtinger_d1(s_comp(nu), q, mu, fd_step, true) -
                                 detail::fd_wirtinger_d1(s_comp(mu), q, nu, fd_step, true);
                st.closure = std::max(st.closure, std::max(std::abs(d20), std::abs(d02)));
            }

        // Norm identity ‖∂G‖²_Ω = G and the disk-bundle bound G ≤ R.
        const Jet pj = wirtinger_jet(*phi_field, q, 1, detail::dual_only());
        Eigen::VectorXcd theta(m), svec(m), avec(m);
        for (int mu = 0; mu < m; ++mu) {
            theta(mu) = pj.d1(mu, false);
            svec(mu) = s_comp(mu)(q);
            avec(mu) = a_comp(mu)(q);
        }
        const double gval = pj.value().real();
        const Eigen::LDLT<Eigen::MatrixXcd> solver = H.ldlt();
        const double nsq = detail::covector_norm_sq(theta, solver);
        st.norm_rel = std::abs(nsq - gval) / std::max(1.0, std::abs(gval));
        if (gval < radius && nsq >= radius) st.disk_ok = false;
        st.eta = std::sqrt(std::max(0.0, detail::covector_norm_sq(avec, solver) +
                                             detail::covector_norm_sq(svec.conjugate().eval(), solver)));
        stats[pt] = st;
    });

    double closure_worst = 0.0, scale_sup = 0.0, norm_worst = 0.0;
    bool disk_ok = true;
    for (const auto& st : stats) {
        closure_worst = std::max(closure_worst, st.closure);
        scale_sup = std::max(scale_sup, st.scale);
        norm_worst = std::max(norm_worst, st.norm_rel);
        rep.sup_eta_norm = std::max(rep.sup_eta_norm, st.eta);
        disk_ok = disk_ok && st.disk_ok;
    }
    rep.closure = CheckResult::against("primitive-closure", closure_worst, 0.0, 1e-7 * std::max(1.0, scale_sup),
                                       "finite-difference", "d(i∂̄G + π*β) vs i∂∂̄(ψ+G) on the grid");
    rep.norm_identity = CheckResult::against("primitive-norm-identity", norm_worst, 0.0, 1e-8, "closed-form",
                                             disk_ok ? "‖∂G‖² = G and G-bound respected on S_R"
                                                     : "‖∂G‖² exceeded R inside S_R");
    if (!disk_ok) rep.norm_identity.pass = false;
    return rep;
}

// ---------------------------------------------------------------------------
// Full curvature of Ω.

/// Chern curvature of (TE, Ω) at a point, by two routes. `coordinate` and
/// `frame` hold ⟨R(e_C, ē_D) e_A, e_B⟩ at index {A,B,C,D} in coordinates
/// resp. the frame {δ/δz (0..n-1), ∂/∂v (n..n+r-1)}. `vertical_block` and
/// `horizontal_block` hold the structured expressions built from bundle
/// curvature and connection data alone.
struct TotalCurvature {
    int n = 0, r = 0;
    OmegaBlocks omega;
    MultiIndexTensor coordinate;       ///< (m,m,m,m), from order-4 jets of Φ
    MultiIndexTensor frame;            ///< (m,m,m,m), coordinate transformed by lifts
    MultiIndexTensor vertical_block;   ///< (r,r,n,n): A_{ij̄αβ̄}
    MultiIndexTensor horizontal_block; ///< (n,n,n,n)
    double crosscheck_rel = 0.0;       ///< worst frame-vs-structured relative gap
    double kahler_defect = 0.0;        ///< worst Kähler index-symmetry violation
    double scale = 1.0;
};

inline TotalCurvature total_curvature(const BundleMetric& G, const BaseMetric& g, const TotalPoint& p,
                                      const DiffConfig& cfg = {}) {
    detail::require_point(G, p);
    const int n = G.base_dim, r = G.rank, m = n + r;
    const std::vector<cplx> q = p.joined();

    TotalCurvature tc;
    tc.n = n;
    tc.r = r;
    tc.omega = assemble_omega(G, g, p, cfg, /*require_griffiths_negative=*/false);

    // Route 1: generic Kähler curvature from order-4 jets of the potential.
    const ExprAST Phi = detail::total_potential_ast(G, g);
    const Jet tj = wirtinger_jet(*Phi.field(), q, 4, cfg);
    std::vector<std::vector<Jet>> hj(static_cast<std::size_t>(m), std::vector<Jet>(static_cast<std::size_t>(m)));
    Eigen::MatrixXcd H0(m, m);
    for (int mu = 0; mu < m; ++mu)
        for (int nu = 0; nu < m; ++nu) {
            hj[static_cast<std::size_t>(mu)][static_cast<std::size_t>(nu)] =
                tj.derivative(mu, false).derivative(nu, true);
            H0(mu, nu) = hj[static_cast<std::size_t>(mu)][static_cast<std::size_t>(nu)].value();
        }
    const Eigen::MatrixXcd Hinv = detail::pd_inverse(H0, "Ω at p");

    tc.coordinate = MultiIndexTensor({IndexKind::Fiber, IndexKind::FiberBar, IndexKind::Base, IndexKind::BaseBar},
                                     {m, m, m, m});
    for (int mu = 0; mu < m; ++mu)
        for (int nu = 0; nu < m; ++nu)
            for (int rho = 0; rho < m; ++rho)
                for (int tau = 0; tau < m; ++tau) {
                    cplx acc = -hj[static_cast<std::size_t>(mu)][static_cast<std::size_t>(nu)].d2(rho, tau);
                    for (int ka = 0; ka < m; ++ka)
                        for (int la = 0; la < m; ++la)
                            acc += Hinv(la, ka) *
                                   hj[static_cast<std::size_t>(mu)][static_cast<std::size_t>(la)].d1(rho, false) *
                                   hj[static_cast<std::size_t>(ka)][static_cast<std::size_t>(nu)].d1(tau, true);
                    tc.coordinate.at({mu, nu, rho, tau}) = acc;
                }
    if (!tc.coordinate.all_finite()) throw NonFiniteValue("total-space curvature contains non-finite entries");

    // Kähler symmetries: R_{μν̄ρτ̄} = R_{ρν̄μτ̄} = R_{μτ̄ρν̄}, conj ↔ swap pairs.
    tc.scale = std::max(1.0, tc.coordinate.max_abs());
    for (int mu = 0; mu < m; ++mu)
        for (int nu = 0; nu < m; ++nu)
            for (int rho = 0; rho < m; ++rho)
                for (int tau = 0; tau < m; ++tau) {
                    const cplx x = tc.coordinate.at({mu, nu, rho, tau});
                    tc.kahler_defect = std::max(
                        {tc.kahler_defect, std::abs(x - tc.coordinate.at({rho, nu, mu, tau})),
                         std::abs(x - tc.coordinate.at({mu, tau, rho, nu})),
                         std::abs(x - std::conj(tc.coordinate.at({nu, mu, tau, rho})))});
                }

    // Transform every slot by the lift matrix P: columns 0..n-1 are horizontal
    // lifts (e_α + H^i_α e_{n+i}), columns n..m-1 the vertical directions.
    Eigen::MatrixXcd P = Eigen::MatrixXcd::Identity(m, m);
    for (int i = 0; i < r; ++i)
        for (int a = 0; a < n; ++a) P(n + i, a) = tc.omega.frame.horizontal(i, a);
    tc.frame = tc.coordinate;
    for (int slot = 0; slot < 4; ++slot) {
        MultiIndexTensor next = tc.frame;
        std::vector<int> idx(4, 0), src(4, 0);
        do {
            src = idx;
            cplx acc{};
            for (int mu = 0; mu < m; ++mu) {
                src[static_cast<std::size_t>(slot)] = mu;
                const cplx w = P(mu, idx[static_cast<std::size_t>(slot)]);
                acc += tc.frame.at(src) * (slot % 2 == 1 ? std::conj(w) : w);
            }
            next.at(idx) = acc;
        } while (tc.frame.next_index(idx));
        tc.frame = std::move(next);
    }

    // Route 2, vertical block: A_{ij̄αβ̄} = R_{il̄αγ̄}R_{kj̄δβ̄} v^k v̄^l Ω^{γ̄δ} + R_{ij̄αβ̄}.
    const MultiIndexTensor R = chern_curvature(G, p.z, cfg);
    const Eigen::MatrixXcd Ominv = detail::pd_inverse(tc.omega.base, "Ω base block");
    tc.vertical_block =
        MultiIndexTensor({IndexKind::Fiber, IndexKind::FiberBar, IndexKind::Base, IndexKind::BaseBar}, {r, r, n, n});
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j)
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    cplx acc = R.at({i, j, a, b});
                    for (int k = 0; k < r; ++k)
                        for (int l = 0; l < r; ++l)
                            for (int ga = 0; ga < n; ++ga)
                                for (int de = 0; de < n; ++de)
                                    acc += R.at({i, l, a, ga}) * R.at({k, j, de, b}) *
                                           p.v[static_cast<std::size_t>(k)] *
                                           std::conj(p.v[static_cast<std::size_t>(l)]) * Ominv(ga, de);
                    tc.vertical_block.at({i, j, a, b}) = acc;
                }

    // Route 2, horizontal block: ∂̄(∂Ω_{ασ̄}Ω^{σ̄γ})Ω_{γβ̄} on horizontal lifts,
    // minus R_{pl̄γβ̄}R_{kq̄ασ̄} v^k v̄^l G^{q̄p} on the dz legs.
    const auto Rj = chern_curvature_jets(G, p.z, 2, cfg);
    const Jet psij = wirtinger_jet(*g.potential.field(), p.z, 4, cfg);
    const auto sp2 = JetSpace::get(m, 2);
    JetMat om(static_cast<std::size_t>(n), std::vector<Jet>(static_cast<std::size_t>(n)));
    std::vector<Jet> vj(static_cast<std::size_t>(r));
    for (int i = 0; i < r; ++i) vj[static_cast<std::size_t>(i)] = Jet::variable(sp2, n + i, p.v[static_cast<std::size_t>(i)]);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            Jet acc = detail::embed_base_jet(sp2, psij.derivative(a, false).derivative(b, true), n);
            for (int i = 0; i < r; ++i)
                for (int j = 0; j < r; ++j)
                    acc -= detail::embed_base_jet(
                               sp2, Rj[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)][static_cast<std::size_t>(a)][static_cast<std::size_t>(b)],
                               n) *
                           vj[static_cast<std::size_t>(i)] * vj[static_cast<std::size_t>(j)].conj();
            om[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = acc;
        }
    const JetMat ominv_jet = detail::jmat_inverse(om);

    // P^γ_{αμ} = Σ_σ ∂_μ(Ω_{ασ̄}) Ω^{σ̄γ}, an order-1 jet per component.
    const auto sp1 = JetSpace::get(m, 1);
    std::vector<std::vector<std::vector<Jet>>> conn(
        static_cast<std::size_t>(n),
        std::vector<std::vector<Jet>>(static_cast<std::size_t>(n), std::vector<Jet>(static_cast<std::size_t>(m))));
    for (int a = 0; a < n; ++a)
        for (int ga = 0; ga < n; ++ga)
            for (int mu = 0; mu < m; ++mu) {
                Jet acc = Jet::constant(sp1, 0.0);
                for (int si = 0; si < n; ++si)
                    acc += om[static_cast<std::size_t>(a)][static_cast<std::size_t>(si)].derivative(mu, false) *
                           ominv_jet[static_cast<std::size_t>(si)][static_cast<std::size_t>(ga)].truncated(1);
                conn[static_cast<std::size_t>(a)][static_cast<std::size_t>(ga)][static_cast<std::size_t>(mu)] = acc;
            }

    const Eigen::MatrixXcd Gfinv = detail::pd_inverse(tc.omega.fiber, "fiber metric");
    tc.horizontal_block =
        MultiIndexTensor({IndexKind::Base, IndexKind::BaseBar, IndexKind::Base, IndexKind::BaseBar}, {n, n, n, n});
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    // ∂̄ of the (1,0)-form conn contracted against the lifts
                    // L_c = e_c + H e, L̄_d: coefficient -∂_ν̄ P^γ_{αμ} L^μ_c L̄^ν_d.
                    cplx acc{};
                    for (int ga = 0; ga < n; ++ga) {
                        cplx t1{};
                        for (int mu = 0; mu < m; ++mu)
                            for (int nu = 0; nu < m; ++nu)
                                t1 -= conn[static_cast<std::size_t>(a)][static_cast<std::size_t>(ga)][static_cast<std::size_t>(mu)]
                                          .d1(nu, true) *
                                      P(mu, c) * std::conj(P(nu, d));
                        acc += t1 * tc.omega.base(ga, b);
                    }
                    for (int pp = 0; pp < r; ++pp)
                        for (int qq = 0; qq < r; ++qq)
                            for (int k = 0; k < r; ++k)
                                for (int l = 0; l < r; ++l)
                                    acc -= R.at({pp, l, c, b}) * R.at({k, qq, a, d}) *
                                           p.v[static_cast<std::size_t>(k)] *
                                           std::conj(p.v[static_cast<std::size_t>(l)]) * Gfinv(qq, pp);
                    tc.horizontal_block.at({a, b, c, d}) = acc;
                }

    // Cross-check the structured blocks against the frame-transformed oracle.
    double gap = 0.0;
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j)
            for (int c = 0; c < m; ++c)
                for (int d = 0; d < m; ++d) {
                    const cplx have = tc.frame.at({n + i, n + j, c, d});
                    const cplx want = (c < n && d < n) ? tc.vertical_block.at({i, j, c, d}) : cplx{};
                    gap = std::max(gap, std::abs(have - want));
                }
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d)
                    gap = std::max(gap, std::abs(tc.frame.at({a, b, c, d}) - tc.horizontal_block.at({a, b, c, d})));
    tc.crosscheck_rel = gap / tc.scale;
    if (tc.crosscheck_rel > 1e-5)
        throw CrossCheckMismatch("total-space curvature: structured blocks vs potential jets", 0.0, tc.crosscheck_rel);
    return tc;
}

// ---------------------------------------------------------------------------
// Tautological pairing.

/// ⟨R^Ω(ξ_hor, ξ̄_hor) P, P⟩ for the tautological section P = v^i ∂/∂v^i and a
/// base direction ξ, via (Ψ Ω⁻¹ Ψ - Ψ)(ξ, ξ̄). Always ≤ 0 for Griffiths-
/// seminegative bundles; strictly negative off the zero section when Ψ ≻ 0.
/// Violations of either bound throw NotGriffithsNegative.
inline double tautological_pairing(const BundleMetric& G, const BaseMetric& g, const TotalPoint& p,
                                   std::span<const cplx> xi, const DiffConfig& cfg = {}) {
    detail::require_point(G, p);
    const int n = G.base_dim;
    if (static_cast<int>(xi.size()) != n) throw ShapeMismatch("tautological pairing: ξ must be a base direction");

    const OmegaBlocks ob = assemble_omega(G, g, p, cfg, /*require_griffiths_negative=*/false);
    const Eigen::MatrixXcd Ominv = detail::pd_inverse(ob.base, "Ω base block");

    cplx acc{};
    for (int a = 0; a < n; ++a)
        for (int s = 0; s < n; ++s) {
            cplx coeff = -ob.psi(a, s);
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c) coeff += ob.psi(a, b) * Ominv(b, c) * ob.psi(c, s);
            acc += coeff * xi[static_cast<std::size_t>(a)] * std::conj(xi[static_cast<std::size_t>(s)]);
        }
    const double scale = ob.sup_norm();
    if (std::abs(acc.imag()) > 1e-10 * scale)
        throw NonFiniteValue("tautological pairing: evaluation is not real");
    const double value = acc.real();

    if (value > 1e-10 * scale)
        throw NotGriffithsNegative("tautological pairing is positive: bundle is not Griffiths seminegative");
    double xi_norm = 0.0, v_norm = 0.0;
    for (const auto& x : xi) xi_norm += std::norm(x);
    for (const auto& x : p.v) v_norm += std::norm(x);
    const double psi_min = n > 0 ? hermitian_eigen(ob.psi).values.minCoeff() : 0.0;
    if (xi_norm > 0.0 && v_norm > 0.0 && psi_min > 1e-8 * scale && value >= -1e-8 * scale)
        throw NotGriffithsNegative("tautological pairing is not strictly negative off the zero section");
    return value;
}

// ---------------------------------------------------------------------------
// Ricci form of Ω.

struct RicciReport {
    Eigen::MatrixXcd ricci;       ///< Ric_{μν̄} = -∂_μ∂_ν̄ log det(Ω_{coord}), (n+r)²
    Eigen::MatrixXcd base_ricci;  ///< -∂_α∂_β̄ log det g on the base, n²
    CheckResult determinant_split;          ///< det Ω_coord = det G · det Ω_base
    std::optional<CheckResult> factor_two;  ///< ι*Ric = 2 Ric_g when E = TM, at v=0
};

namespace detail {

/// Determinant of a jet-valued matrix by Gaussian elimination.
inline Jet jmat_det(JetMat a) {
    const int k = static_cast<int>(a.size());
    Jet det = Jet::constant(a[0][0].space(), 1.0);
    for (int col = 0; col < k; ++col) {
        int piv = col;
        for (int row = col + 1; row < k; ++row)
            if (std::abs(a[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)].value()) >
                std::abs(a[static_cast<std::size_t>(piv)][static_cast<std::size_t>(col)].value()))
                piv = row;
        if (std::abs(a[static_cast<std::size_t>(piv)][static_cast<std::size_t>(col)].value()) < 1e-12)
            throw SingularMetric("jet determinant: pivot is numerically zero");
        if (piv != col) {
            std::swap(a[static_cast<std::size_t>(piv)], a[static_cast<std::size_t>(col)]);
            det = -det;
        }
        det = det * a[static_cast<std::size_t>(col)][static_cast<std::size_t>(col)];
        const Jet inv = a[static_cast<std::size_t>(col)][static_cast<std::size_t>(col)].inverse();
        for (int row = col + 1; row < k; ++row) {
            const Jet f = a[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)] * inv;
            for (int c2 = col; c2 < k; ++c2)
                a[static_cast<std::size_t>(row)][static_cast<std::size_t>(c2)] -=
                    f * a[static_cast<std::size_t>(col)][static_cast<std::size_t>(c2)];
        }
    }
    return det;
}

}  // namespace detail

/// Ricci form Ric^Ω = -∂∂̄ log det(Ω) by order-2 jets of the log-determinant.
/// Its determinant splits as det G · det Ω_base (block-triangular congruence);
/// at v = 0 with E = TM (r = n, G ≡ g) the restriction equals twice the base
/// Ricci form; both are verified.
inline RicciReport ricci_report(const BundleMetric& G, const BaseMetric& g, const TotalPoint& p,
                                const DiffConfig& cfg = {}) {
    detail::require_point(G, p);
    const int n = G.base_dim, r = G.rank, m = n + r;
    const std::vector<cplx> q = p.joined();

    const ExprAST Phi = detail::total_potential_ast(G, g);
    const Jet tj = wirtinger_jet(*Phi.field(), q, 4, cfg);
    JetMat hj(static_cast<std::size_t>(m), std::vector<Jet>(static_cast<std::size_t>(m)));
    Eigen::MatrixXcd H0(m, m);
    for (int mu = 0; mu < m; ++mu)
        for (int nu = 0; nu < m; ++nu) {
            hj[static_cast<std::size_t>(mu)][static_cast<std::size_t>(nu)] =
                tj.derivative(mu, false).derivative(nu, true);
            H0(mu, nu) = hj[static_cast<std::size_t>(mu)][static_cast<std::size_t>(nu)].value();
        }
    if (hermitian_eigen(H0).values.minCoeff() <= 0.0) throw MetricNotPositive("Ω is not positive definite at p");

    const Jet logdet = detail::jmat_det(hj).log();
    RicciReport rep;
    rep.ricci = Eigen::MatrixXcd(m, m);
    for (int mu = 0; mu < m; ++mu)
        for (int nu = 0; nu < m; ++nu) rep.ricci(mu, nu) = -logdet.d2(mu, nu);

    const Jet psij = wirtinger_jet(*g.potential.field(), p.z, 4, cfg);
    JetMat gj(static_cast<std::size_t>(n), std::vector<Jet>(static_cast<std::size_t>(n)));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            gj[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
                psij.derivative(a, false).derivative(b, true);
    const Jet base_logdet = detail::jmat_det(gj).log();
    rep.base_ricci = Eigen::MatrixXcd(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) rep.base_ricci(a, b) = -base_logdet.d2(a, b);

    const OmegaBlocks ob = assemble_omega(G, g, p, cfg, /*require_griffiths_negative=*/false);
    const cplx split = ob.fiber.determinant() * ob.base.determinant();
    const cplx direct = H0.determinant();
    rep.determinant_split =
        CheckResult::against("ricci-determinant-split", std::abs(direct - split) / std::max(1.0, std::abs(direct)),
                             0.0, 1e-8, "identity", "det Ω vs det G · det Ω_base");

    if (r == n && p.on_zero_section()) {
        double worst = 0.0, ref = 0.0;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                worst = std::max(worst, std::abs(rep.ricci(a, b) - 2.0 * rep.base_ricci(a, b)));
                ref = std::max(ref, std::abs(2.0 * rep.base_ricci(a, b)));
            }
        rep.factor_two = CheckResult::against("ricci-factor-two", worst, 0.0, 1e-6 * std::max(1.0, ref),
                                              "jet-oracle", "zero-section Ricci restriction vs twice the base Ricci");
    }
    return rep;
}

/// Upper bound -1/(π(genus-1)) for the restricted Ricci form of Ω over the
/// moduli of genus-`genus` surfaces, given the classical Weil–Petersson Ricci
/// bound -1/(2π(genus-1)) on the base input. Pure arithmetic.
inline double restricted_ricci_bound(int genus) {
    if (genus < 2) throw BadGenus("restricted Ricci bound needs genus >= 2");
    return -1.0 / (3.14159265358979323846 * (genus - 1));
}

}  // namespace bundlecurv
