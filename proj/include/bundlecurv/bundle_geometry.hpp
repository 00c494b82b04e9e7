#pragma once

// Chern curvature of Hermitian bundle metrics, the Nakano curvature operator,
// and Griffiths/Nakano positivity certification.
//
// Conventions. For a metric G with entries G_{i jbar}(z) (row i unbarred,
// column j barred) the curvature tensor is
//   R_{i jbar alpha betabar}
//     = -d_alpha d_betabar G_{i jbar}
//       + G^{k lbar} (d_alpha G_{i lbar}) (d_betabar G_{k jbar}),
// where G^{k lbar} = G^{lbar k} is entry (l, k) of the inverse matrix, so that
// G_{i jbar} G^{k jbar} = delta_i^k. With these signs the form
//   sum R_{i jbar alpha betabar} v^i conj(v)^j xi^alpha conj(xi)^beta
// is negative for Griffiths-negative metrics (e.g. 1 + |z|^2 gives -1 at 0).

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bundlecurv/errors.hpp"
#include "bundlecurv/expr.hpp"
#include "bundlecurv/jet.hpp"
#include "bundlecurv/rng.hpp"
#include "bundlecurv/tensor.hpp"
#include "bundlecurv/wirtinger.hpp"

namespace bundlecurv {

/// Hermitian metric on a rank-r bundle over an n-dimensional base chart,
/// given entrywise as expressions in the base variables.
struct BundleMetric {
    int base_dim = 1;
    int rank = 1;
    std::vector<std::vector<ExprAST>> entries;  // rank x rank, each over (base_dim, 0)
    std::string chart;

    static BundleMetric from_catalog(const CatalogEntry& e) {
        if (e.metric.empty()) throw ConfigError("catalog entry '" + e.name + "' has no metric entries");
        BundleMetric m;
        m.base_dim = e.base_dim;
        m.rank = e.fiber_rank;
        m.entries = e.metric;
        m.chart = e.chart;
        return m;
    }

    static BundleMetric from_strings(int n, const std::vector<std::vector<std::string>>& texts) {
        BundleMetric m;
        m.base_dim = n;
        m.rank = static_cast<int>(texts.size());
        for (const auto& row : texts) {
            if (static_cast<int>(row.size()) != m.rank) throw ShapeMismatch("bundle metric must be square");
            std::vector<ExprAST> parsed;
            for (const auto& s : row) parsed.push_back(parse_expr(s, n, 0));
            m.entries.push_back(std::move(parsed));
        }
        return m;
    }
};

/// Kähler base metric given by a potential: g_{alpha betabar} = d_a d_bbar psi.
struct BaseMetric {
    int dim = 1;
    ExprAST potential;  // over (dim, 0)

    static BaseMetric from_string(int n, const std::string& text) { return {n, parse_expr(text, n, 0)}; }
};

// ---------------------------------------------------------------------------
// Jet-valued matrices (entries share one jet space).

using JetMat = std::vector<std::vector<Jet>>;

namespace detail {

inline JetMat jmat_mul(const JetMat& a, const JetMat& b) {
    const std::size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
    JetMat out(n, std::vector<Jet>(m));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            Jet acc = a[i][0] * b[0][j];
            for (std::size_t p = 1; p < k; ++p) acc += a[i][p] * b[p][j];
            out[i][j] = acc;
        }
    return out;
}

/// Inverse of a jet-valued square matrix: invert the value part, then expand
/// the Neumann series in the (nilpotent) higher-order part.
inline JetMat jmat_inverse(const JetMat& m) {
    const int r = static_cast<int>(m.size());
    const auto sp = m[0][0].space();
    Eigen::MatrixXcd m0(r, r);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) m0(i, j) = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].value();
    const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m0, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    if (smin <= 0.0 || smax / smin > 1e13) throw SingularMetric("matrix condition number exceeds 1e13");
    const Eigen::MatrixXcd n0 = svd.solve(Eigen::MatrixXcd::Identity(r, r));

    // w = n0 * (m - m0): jet matrix with vanishing value part
    JetMat w(static_cast<std::size_t>(r), std::vector<Jet>(static_cast<std::size_t>(r)));
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            Jet acc = Jet::constant(sp, 0.0);
            for (int p = 0; p < r; ++p) {
                Jet high = m[static_cast<std::size_t>(p)][static_cast<std::size_t>(j)];
                high.coeff(0) = 0.0;
                acc += n0(i, p) * high;
            }
            w[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = acc;
        }

    // (I + w)^{-1} = sum (-w)^k, truncated by the jet order
    JetMat series(static_cast<std::size_t>(r), std::vector<Jet>(static_cast<std::size_t>(r), Jet::constant(sp, 0.0)));
    JetMat power(series);
    for (int i = 0; i < r; ++i) {
        series[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = Jet::constant(sp, 1.0);
        power[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = Jet::constant(sp, 1.0);
    }
    for (int k = 1; k <= sp->order(); ++k) {
        power = jmat_mul(power, w);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j) {
                Jet& s = series[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
                const Jet& p = power[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
                s += (k % 2 ? -p : p);
            }
    }
    // result = series * n0
    JetMat out(static_cast<std::size_t>(r), std::vector<Jet>(static_cast<std::size_t>(r)));
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            Jet acc = Jet::constant(sp, 0.0);
            for (int p = 0; p < r; ++p) acc += series[static_cast<std::size_t>(i)][static_cast<std::size_t>(p)] * n0(p, j);
            out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = acc;
        }
    return out;
}

}  // namespace detail

/// Entrywise Wirtinger jets of the metric at z.
inline JetMat bundle_metric_jets(const BundleMetric& g, std::span<const cplx> z, int order, const DiffConfig& cfg) {
    if (static_cast<int>(z.size()) != g.base_dim) throw ShapeMismatch("metric evaluation: point dimension mismatch");
    JetMat out(static_cast<std::size_t>(g.rank), std::vector<Jet>(static_cast<std::size_t>(g.rank)));
    for (int i = 0; i < g.rank; ++i)
        for (int j = 0; j < g.rank; ++j)
            out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                wirtinger_jet(*g.entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].field(), z, order, cfg);
    return out;
}

inline Eigen::MatrixXcd bundle_metric_value(const BundleMetric& g, std::span<const cplx> z, const DiffConfig& cfg) {
    const JetMat jets = bundle_metric_jets(g, z, 0, cfg);
    Eigen::MatrixXcd out(g.rank, g.rank);
    for (int i = 0; i < g.rank; ++i)
        for (int j = 0; j < g.rank; ++j) out(i, j) = jets[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].value();
    return out;
}

/// g_{alpha betabar}(z) from the base potential.
inline Eigen::MatrixXcd base_metric_matrix(const BaseMetric& base, std::span<const cplx> z, const DiffConfig& cfg) {
    if (static_cast<int>(z.size()) != base.dim) throw ShapeMismatch("base metric: point dimension mismatch");
    const Jet j = wirtinger_jet(*base.potential.field(), z, 2, cfg);
    Eigen::MatrixXcd out(base.dim, base.dim);
    for (int a = 0; a < base.dim; ++a)
        for (int b = 0; b < base.dim; ++b) out(a, b) = j.d2(a, b);
    return out;
}

// ---------------------------------------------------------------------------
// Chern curvature.

/// Curvature entries as jets over the base variables (order = jet order of
/// each entry). Indexing: out[i][j][alpha][beta] = jet of R_{i jbar alpha betabar}.
inline std::vector<std::vector<std::vector<std::vector<Jet>>>> chern_curvature_jets(const BundleMetric& g,
                                                                                    std::span<const cplx> z,
                                                                                    int order,
                                                                                    const DiffConfig& cfg) {
    const int r = g.rank, n = g.base_dim;
    const JetMat gj = bundle_metric_jets(g, z, order + 2, cfg);

    // truncate metric jets and invert once
    JetMat gtrunc(static_cast<std::size_t>(r), std::vector<Jet>(static_cast<std::size_t>(r)));
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j)
            gtrunc[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                gj[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].truncated(order);
    const JetMat ginv = detail::jmat_inverse(gtrunc);  // ginv[l][k] = G^{lbar k} = G^{k lbar}

    // first derivatives, truncated to the working order
    // dg[a][i][l] = d_alpha G_{i lbar}, dgbar[b][k][j] = d_betabar G_{k jbar}
    auto dg = std::vector<JetMat>(static_cast<std::size_t>(n));
    auto dgbar = std::vector<JetMat>(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) {
        dg[static_cast<std::size_t>(a)].assign(static_cast<std::size_t>(r), std::vector<Jet>(static_cast<std::size_t>(r)));
        dgbar[static_cast<std::size_t>(a)].assign(static_cast<std::size_t>(r), std::vector<Jet>(static_cast<std::size_t>(r)));
        for (int i = 0; i < r; ++i)
            for (int l = 0; l < r; ++l) {
                dg[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)][static_cast<std::size_t>(l)] =
                    gj[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)].derivative(a, false).truncated(order);
                dgbar[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)][static_cast<std::size_t>(l)] =
                    gj[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)].derivative(a, true).truncated(order);
            }
    }

    std::vector<std::vector<std::vector<std::vector<Jet>>>> out(
        static_cast<std::size_t>(r),
        std::vector<std::vector<std::vector<Jet>>>(
            static_cast<std::size_t>(r),
            std::vector<std::vector<Jet>>(static_cast<std::size_t>(n), std::vector<Jet>(static_cast<std::size_t>(n)))));
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j)
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    Jet acc = -gj[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]
                                   .derivative(a, false)
                                   .derivative(b, true)
                                   .truncated(order);
                    for (int k = 0; k < r; ++k)
                        for (int l = 0; l < r; ++l)
                            acc += ginv[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)] *
                                   dg[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)][static_cast<std::size_t>(l)] *
                                   dgbar[static_cast<std::size_t>(b)][static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
                    out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)][static_cast<std::size_t>(a)]
                       [static_cast<std::size_t>(b)] = acc;
                }
    return out;
}

/// Chern curvature tensor R_{i jbar alpha betabar} at a point.
inline MultiIndexTensor chern_curvature(const BundleMetric& g, std::span<const cplx> z, const DiffConfig& cfg) {
    const int r = g.rank, n = g.base_dim;
    const auto jets = chern_curvature_jets(g, z, 0, cfg);
    MultiIndexTensor out({IndexKind::Fiber, IndexKind::FiberBar, IndexKind::Base, IndexKind::BaseBar}, {r, r, n, n});
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j)
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    out.at({i, j, a, b}) = jets[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]
                                               [static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]
                                                   .value();
    if (!out.all_finite()) throw NonFiniteValue("curvature tensor contains non-finite entries");
    return out;
}

// ---------------------------------------------------------------------------
// Nakano curvature operator.

/// The curvature form on T_z X (x) E_z, flattened over the composite index
/// (alpha, i): numerator[(alpha i), (beta j)] = R_{i jbar alpha betabar},
/// paired with the Gram form gram = g (x) G. Eigenvalues of (numerator, gram)
/// are the stationary values of the Nakano quotient.
struct NakanoOperator {
    Eigen::MatrixXcd numerator;
    Eigen::MatrixXcd gram;

    EigenResult eigen() const { return hermitian_eigen(numerator, gram); }
};

inline NakanoOperator nakano_operator(const MultiIndexTensor& curv, const Eigen::MatrixXcd& g,
                                      const Eigen::MatrixXcd& bundle_g) {
    if (curv.rank() != 4) throw ShapeMismatch("nakano_operator: curvature tensor must have rank 4");
    const int r = curv.extent(0), n = curv.extent(2);
    if (curv.extent(1) != r || curv.extent(3) != n) throw ShapeMismatch("nakano_operator: tensor extents");
    if (g.rows() != n || g.cols() != n || bundle_g.rows() != r || bundle_g.cols() != r)
        throw ShapeMismatch("nakano_operator: metric dimensions");

    NakanoOperator op;
    const std::vector<int> rows = {2, 0}, cols = {3, 1};
    op.numerator = curv.flatten(rows, cols);
    op.gram.resize(n * r, n * r);
    for (int a = 0; a < n; ++a)
        for (int i = 0; i < r; ++i)
            for (int b = 0; b < n; ++b)
                for (int j = 0; j < r; ++j) op.gram(a * r + i, b * r + j) = g(a, b) * bundle_g(i, j);
    return op;
}

// ---------------------------------------------------------------------------
// Positivity certificates.

struct PositivityCertificate {
    std::string kind;  ///< "griffiths" or "nakano"
    std::string sign;  ///< "positive", "semi", "negative", "indefinite"
    double value = 0.0;      ///< minimal normalized curvature value found
    double max_value = 0.0;  ///< maximal normalized value found
    std::vector<cplx> witness_base;   ///< xi at the minimum (griffiths) / flattened tensor (nakano)
    std::vector<cplx> witness_fiber;  ///< v at the minimum (griffiths only)
    long samples = 0;                 ///< candidate evaluations performed
    bool heuristic = false;           ///< true when the extremum is an upper bound, not certified

    double margin() const { return std::min(std::abs(value), std::abs(max_value)); }
};

namespace detail {

inline std::string classify_sign(double minv, double maxv, double scale) {
    const double tol = 1e-8 * std::max(1.0, scale);
    if (minv > tol) return "positive";
    if (maxv < -tol) return "negative";
    if (minv < -tol && maxv > tol) return "indefinite";
    return "semi";
}

}  // namespace detail

/// Normalized Griffiths quotient
///   R_{i jbar a bbar} v^i conj(v)^j xi^a conj(xi)^b / (|xi|^2_g |v|^2_G).
inline double griffiths_ratio(const MultiIndexTensor& curv, const Eigen::MatrixXcd& g,
                              const Eigen::MatrixXcd& bundle_g, std::span<const cplx> xi, std::span<const cplx> v) {
    const int r = curv.extent(0), n = curv.extent(2);
    cplx num = 0.0;
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j)
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    num += curv.at({i, j, a, b}) * v[static_cast<std::size_t>(i)] *
                           std::conj(v[static_cast<std::size_t>(j)]) * xi[static_cast<std::size_t>(a)] *
                           std::conj(xi[static_cast<std::size_t>(b)]);
    cplx ng = 0.0, nG = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) ng += g(a, b) * xi[static_cast<std::size_t>(a)] * std::conj(xi[static_cast<std::size_t>(b)]);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j)
            nG += bundle_g(i, j) * v[static_cast<std::size_t>(i)] * std::conj(v[static_cast<std::size_t>(j)]);
    const double den = ng.real() * nG.real();
    if (den <= 1e-300) throw DomainError("griffiths_ratio: degenerate direction");
    return num.real() / den;
}

namespace detail {

/// One alternating-minimization descent from the given start; returns the
/// final quotient and updates xi, v in place.
inline double griffiths_descent(const MultiIndexTensor& curv, const Eigen::MatrixXcd& g,
                                const Eigen::MatrixXcd& bundle_g, std::vector<cplx>& xi, std::vector<cplx>& v,
                                bool maximize) {
    const int r = curv.extent(0), n = curv.extent(2);
    const double flip = maximize ? -1.0 : 1.0;
    double prev = flip * griffiths_ratio(curv, g, bundle_g, xi, v);
    for (int iter = 0; iter < 60; ++iter) {
        // fix xi: Hermitian pencil in v
        Eigen::MatrixXcd mv = Eigen::MatrixXcd::Zero(r, r);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j) {
                cplx acc = 0.0;
                for (int a = 0; a < n; ++a)
                    for (int b = 0; b < n; ++b)
                        acc += curv.at({i, j, a, b}) * xi[static_cast<std::size_t>(a)] *
                               std::conj(xi[static_cast<std::size_t>(b)]);
                mv(j, i) = flip * acc;  // so that x^H mv x = flip * sum M_{ij} v^i conj(v^j)
            }
        cplx xig = 0.0;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                xig += g(a, b) * xi[static_cast<std::size_t>(a)] * std::conj(xi[static_cast<std::size_t>(b)]);
        EigenResult ev = hermitian_eigen(mv, Eigen::MatrixXcd(xig.real() * bundle_g.transpose()));
        for (int i = 0; i < r; ++i) v[static_cast<std::size_t>(i)] = ev.vectors(i, 0);

        // fix v: Hermitian pencil in xi
        Eigen::MatrixXcd mx = Eigen::MatrixXcd::Zero(n, n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                cplx acc = 0.0;
                for (int i = 0; i < r; ++i)
                    for (int j = 0; j < r; ++j)
                        acc += curv.at({i, j, a, b}) * v[static_cast<std::size_t>(i)] *
                               std::conj(v[static_cast<std::size_t>(j)]);
                mx(b, a) = flip * acc;
            }
        cplx vG = 0.0;
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j)
                vG += bundle_g(i, j) * v[static_cast<std::size_t>(i)] * std::conj(v[static_cast<std::size_t>(j)]);
        EigenResult ex = hermitian_eigen(mx, Eigen::MatrixXcd(vG.real() * g.transpose()));
        for (int a = 0; a < n; ++a) xi[static_cast<std::size_t>(a)] = ex.vectors(a, 0);

        const double cur = ex.values[0];  // quotient after the xi step
        if (std::abs(cur - prev) <= 1e-13 * std::max(1.0, std::abs(cur))) {
            prev = cur;
            break;
        }
        prev = cur;
    }
    return flip * prev;
}

/// Deterministic angular grid over unit vectors of C^m: polar angles in
/// [0, pi/2], relative phases in [0, 2 pi). `steps` points per parameter.
inline std::vector<std::vector<cplx>> angular_grid_vectors(int m, int steps) {
    std::vector<std::vector<cplx>> out;
    if (m == 1) {
        out.push_back({cplx(1.0, 0.0)});
        return out;
    }
    // enumerate over 2(m-1) parameters
    const int params = 2 * (m - 1);
    std::vector<int> idx(static_cast<std::size_t>(params), 0);
    const double pi = 3.14159265358979323846;
    while (true) {
        std::vector<double> theta(static_cast<std::size_t>(m - 1)), phase(static_cast<std::size_t>(m - 1));
        for (int k = 0; k < m - 1; ++k) {
            theta[static_cast<std::size_t>(k)] = (pi / 2.0) * idx[static_cast<std::size_t>(k)] / (steps - 1);
            phase[static_cast<std::size_t>(k)] =
                2.0 * pi * idx[static_cast<std::size_t>(m - 1 + k)] / static_cast<double>(steps);
        }
        // hyperspherical: |v_0| = cos t_0, |v_k| = sin t_0 ... cos t_k
        std::vector<cplx> v(static_cast<std::size_t>(m));
        double sines = 1.0;
        for (int k = 0; k < m - 1; ++k) {
            v[static_cast<std::size_t>(k)] =
                sines * std::cos(theta[static_cast<std::size_t>(k)]) *
                (k == 0 ? cplx(1.0, 0.0) : std::polar(1.0, phase[static_cast<std::size_t>(k - 1)]));
            sines *= std::sin(theta[static_cast<std::size_t>(k)]);
        }
        v[static_cast<std::size_t>(m - 1)] = sines * std::polar(1.0, phase[static_cast<std::size_t>(m - 2)]);
        out.push_back(std::move(v));
        int s = params - 1;
        for (; s >= 0; --s) {
            if (++idx[static_cast<std::size_t>(s)] < steps) break;
            idx[static_cast<std::size_t>(s)] = 0;
        }
        if (s < 0) break;
    }
    return out;
}

}  // namespace detail

/// Heuristic extremum of the Griffiths quotient over simple tensors xi (x) v:
/// alternating eigen-minimization from random restarts plus a deterministic
/// angular grid. Exact (single eigenproblem) when n = 1 or r = 1; otherwise
/// the reported minimum is an upper bound on the true minimum.
inline PositivityCertificate griffiths_extremum(const MultiIndexTensor& curv, const Eigen::MatrixXcd& g,
                                                const Eigen::MatrixXcd& bundle_g, int restarts = 32,
                                                std::uint64_t seed = 42) {
    if (restarts < 1) throw ConfigError("griffiths_extremum: restarts must be >= 1");
    const int r = curv.extent(0), n = curv.extent(2);
    PositivityCertificate cert;
    cert.kind = "griffiths";
    cert.heuristic = (n > 1 && r > 1);

    long samples = 0;
    auto run_side = [&](bool maximize) {
        double best = maximize ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
        std::vector<cplx> best_xi, best_v;
        auto consider = [&](std::vector<cplx> xi, std::vector<cplx> v) {
            const double val = detail::griffiths_descent(curv, g, bundle_g, xi, v, maximize);
            ++samples;
            if ((maximize && val > best) || (!maximize && val < best)) {
                best = val;
                best_xi = xi;
                best_v = v;
            }
        };

        Rng rng(seed + (maximize ? 1 : 0));
        for (int k = 0; k < restarts; ++k) consider(rng.unit_vector(n), rng.unit_vector(r));

        // deterministic angular grid start: scan the grid for the best raw
        // quotient and descend once from there. Step count shrinks when the
        // parameter count would make 11^d unreasonable.
        const int params = 2 * (n - 1) + 2 * (r - 1);
        if (params > 0 && std::pow(3.0, params) <= 2.0e5) {
            int steps = 11;
            while (steps > 3 && std::pow(static_cast<double>(steps), params) > 2.0e5) steps -= 2;
            const auto xis = detail::angular_grid_vectors(n, steps);
            const auto vs = detail::angular_grid_vectors(r, steps);
            double best_raw = maximize ? -std::numeric_limits<double>::infinity()
                                       : std::numeric_limits<double>::infinity();
            std::vector<cplx> gx, gv;
            for (const auto& xi : xis)
                for (const auto& v : vs) {
                    const double q = griffiths_ratio(curv, g, bundle_g, xi, v);
                    ++samples;
                    if ((maximize && q > best_raw) || (!maximize && q < best_raw)) {
                        best_raw = q;
                        gx = xi;
                        gv = v;
                    }
                }
            consider(gx, gv);
        }
        return std::make_tuple(best, best_xi, best_v);
    };

    auto [minv, min_xi, min_v] = run_side(false);
    auto [maxv, max_xi, max_v] = run_side(true);
    cert.value = minv;
    cert.max_value = maxv;
    cert.witness_base = min_xi;
    cert.witness_fiber = min_v;
    cert.samples = samples;
    const double scale = std::max(std::abs(minv), std::abs(maxv));
    cert.sign = detail::classify_sign(minv, maxv, scale);

    // the witness must reproduce the extremal value
    const double check = griffiths_ratio(curv, g, bundle_g, cert.witness_base, cert.witness_fiber);
    if (std::abs(check - cert.value) > 1e-8 * std::max(1.0, std::abs(cert.value)))
        throw Error("griffiths_extremum: witness failed to reproduce the extremal value");
    return cert;
}

/// Exact Nakano certificate from the generalized eigenproblem.
inline PositivityCertificate nakano_certificate(const MultiIndexTensor& curv, const Eigen::MatrixXcd& g,
                                                const Eigen::MatrixXcd& bundle_g) {
    const NakanoOperator op = nakano_operator(curv, g, bundle_g);
    const EigenResult ev = op.eigen();
    PositivityCertificate cert;
    cert.kind = "nakano";
    cert.heuristic = false;
    const int dim = static_cast<int>(ev.values.size());
    cert.value = ev.values[0];
    cert.max_value = ev.values[dim - 1];
    cert.witness_base.assign(op.numerator.rows(), cplx{});
    for (int k = 0; k < dim; ++k) cert.witness_base[static_cast<std::size_t>(k)] = ev.vectors(k, 0);
    cert.samples = dim;
    const double scale = std::max(std::abs(cert.value), std::abs(cert.max_value));
    cert.sign = detail::classify_sign(cert.value, cert.max_value, scale);
    return cert;
}

// ---------------------------------------------------------------------------
// Quadratic-differential ball bound.

/// L^2 bound 9 pi (genus - 1): sup-norm bound 3/2 squared times the
/// hyperbolic area 2 pi (2 genus - 2).
inline double nehari_l2_bound(int genus) {
    if (genus < 2) throw BadGenus("nehari_l2_bound requires genus >= 2");
    const double pi = 3.14159265358979323846;
    return 9.0 * pi * static_cast<double>(genus - 1);
}

}  // namespace bundlecurv
