#pragma once

// Mixed Wirtinger derivatives of smooth fields, by two independent routes:
//
//  * nested-dual: evaluate the field in truncated jet arithmetic; exact up to
//    roundoff for any composite of the supported primitives;
//  * finite differences: 4th-order central (Fornberg) stencils applied to the
//    field's extended-precision evaluation, with the complex-variable
//    derivatives assembled from real partials via
//      d/dz = (d/dx - i d/dy)/2,   d/dzbar = (d/dx + i d/dy)/2.
//
// Cross-check mode runs both and insists on 1e-5 relative agreement.

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "bundlecurv/errors.hpp"
#include "bundlecurv/fields.hpp"
#include "bundlecurv/jet.hpp"

namespace bundlecurv {

enum class DiffMode { NestedDual, FiniteDifference, CrossCheck };

struct DiffConfig {
    DiffMode mode = DiffMode::CrossCheck;
    double fd_step = 1e-3;  ///< relative step for central differences
    bool richardson = false;

    void validate() const {
        if (!(fd_step > 1e-6 && fd_step < 1e-2))
            throw ConfigError("DiffConfig: fd_step must lie in (1e-6, 1e-2)");
    }
};

inline DiffMode parse_diff_mode(const std::string& s) {
    if (s == "nested-dual") return DiffMode::NestedDual;
    if (s == "finite-difference") return DiffMode::FiniteDifference;
    if (s == "cross-check") return DiffMode::CrossCheck;
    throw ConfigError("unknown differentiation mode: '" + s + "'");
}

namespace detail {

/// Fornberg weights for the d-th derivative at 0 on nodes {-M..M}*h.
/// Classic recurrence; long double to keep stencil roundoff below tolerance.
inline std::vector<long double> fornberg_weights(int d, int M, long double h) {
    const int n = 2 * M + 1;
    std::vector<long double> x(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = static_cast<long double>(i - M) * h;
    // c[j][k] = weight of node j for derivative order k.
    std::vector<std::vector<long double>> c(static_cast<std::size_t>(n),
                                            std::vector<long double>(static_cast<std::size_t>(d + 1), 0.0L));
    long double c1 = 1.0L;
    c[0][0] = 1.0L;
    for (int i = 1; i < n; ++i) {
        long double c2 = 1.0L;
        const int mn = std::min(i, d);
        for (int j = 0; j < i; ++j) {
            const long double c3 = x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] =
                        c1 *
                        (static_cast<long double>(k) * c[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(k - 1)] -
                         x[static_cast<std::size_t>(i - 1)] * c[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(k)]) /
                        c2;
                c[static_cast<std::size_t>(i)][0] =
                    -c1 * x[static_cast<std::size_t>(i - 1)] * c[static_cast<std::size_t>(i - 1)][0] / c2;
            }
            for (int k = mn; k >= 1; --k)
                c[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] =
                    (x[static_cast<std::size_t>(i)] * c[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] -
                     static_cast<long double>(k) * c[static_cast<std::size_t>(j)][static_cast<std::size_t>(k - 1)]) /
                    c3;
            c[static_cast<std::size_t>(j)][0] = x[static_cast<std::size_t>(i)] * c[static_cast<std::size_t>(j)][0] / c3;
        }
        c1 = c2;
    }
    std::vector<long double> w(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) w[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j)][static_cast<std::size_t>(d)];
    return w;
}

/// Evaluates one mixed real partial D_q f(p) by a tensor-product central
/// stencil. `q` is indexed over 2m real slots: slot s < m perturbs Re(p_s),
/// slot s >= m perturbs Im(p_{s-m}).
class RealPartialEngine {
public:
    RealPartialEngine(const Field& f, std::span<const cplx> p, double rel_step)
        : f_(f), m_(static_cast<int>(p.size())) {
        base_.reserve(p.size());
        steps_.reserve(p.size());
        for (const auto& z : p) {
            base_.push_back(cplxld(static_cast<long double>(z.real()), static_cast<long double>(z.imag())));
            steps_.push_back(static_cast<long double>(rel_step) * std::max<long double>(1.0L, std::abs(cplxld(z))));
        }
    }

    cplxld partial(const std::vector<int>& q, long double step_scale) {
        std::vector<int> slots;
        for (int s = 0; s < 2 * m_; ++s)
            if (q[static_cast<std::size_t>(s)] > 0) slots.push_back(s);
        if (slots.empty()) return eval(base_);

        struct Axis {
            int slot;
            int M;
            std::vector<long double> weights;
            long double h;
        };
        std::vector<Axis> axes;
        for (int s : slots) {
            const int d = q[static_cast<std::size_t>(s)];
            const int M = (d + 1) / 2 + 1;  // 5-point stencil for d<=2, 7-point for d<=4
            const long double h = steps_[static_cast<std::size_t>(s % m_)] * step_scale;
            axes.push_back({s, M, fornberg_weights(d, M, h), h});
        }

        cplxld acc = 0.0L;
        std::vector<int> idx(axes.size(), 0);
        std::vector<cplxld> pt(base_);
        // Odometer loop over the tensor-product stencil. Deltas accumulate so
        // that Re- and Im-axes of the same complex variable combine correctly.
        while (true) {
            for (const auto& ax : axes) {
                const int v = ax.slot % m_;
                pt[static_cast<std::size_t>(v)] = base_[static_cast<std::size_t>(v)];
            }
            long double w = 1.0L;
            for (std::size_t a = 0; a < axes.size(); ++a) {
                const int off = idx[a] - axes[a].M;
                w *= axes[a].weights[static_cast<std::size_t>(idx[a])];
                const int slot = axes[a].slot;
                const long double delta = static_cast<long double>(off) * axes[a].h;
                if (slot < m_)
                    pt[static_cast<std::size_t>(slot)] += delta;
                else
                    pt[static_cast<std::size_t>(slot - m_)] += cplxld(0.0L, delta);
            }
            if (w != 0.0L) acc += w * eval(pt);
            std::size_t a = 0;
            for (; a < axes.size(); ++a) {
                if (++idx[a] < 2 * axes[a].M + 1) break;
                idx[a] = 0;
            }
            if (a == axes.size()) break;
        }
        return acc;
    }

private:
    cplxld eval(const std::vector<cplxld>& pt) {
        const cplxld v = f_.eval_scalar(pt);
        if (!std::isfinite(static_cast<double>(v.real())) || !std::isfinite(static_cast<double>(v.imag())))
            throw NonFiniteValue("finite-difference evaluation produced a non-finite value");
        return v;
    }

    const Field& f_;
    int m_;
    std::vector<cplxld> base_;
    std::vector<long double> steps_;
};

inline double binom(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
}

/// i^k, exactly (k may be negative).
inline cplxld unit_ipow(int k) {
    switch (((k % 4) + 4) % 4) {
        case 0: return {1.0L, 0.0L};
        case 1: return {0.0L, 1.0L};
        case 2: return {-1.0L, 0.0L};
        default: return {0.0L, -1.0L};
    }
}

}  // namespace detail

/// Nested-dual Wirtinger jet: evaluate the field in jet arithmetic.
inline Jet dual_jet(const Field& f, std::span<const cplx> p, int order) {
    auto sp = JetSpace::get(static_cast<int>(p.size()), order);
    Jet j = f.eval_jet(sp, p);
    if (!j.all_finite()) throw NonFiniteValue("jet evaluation produced a non-finite value");
    return j;
}

/// Finite-difference Wirtinger jet (independent derivative oracle).
inline Jet fd_jet(const Field& f, std::span<const cplx> p, int order, double fd_step, bool richardson) {
    const int m = static_cast<int>(p.size());
    auto sp = JetSpace::get(m, order);
    detail::RealPartialEngine engine(f, p, fd_step);

    // Cache of real mixed partials, keyed by the packed real multi-order.
    std::map<std::vector<int>, cplxld> cache;
    auto real_partial = [&](const std::vector<int>& q) -> cplxld {
        auto it = cache.find(q);
        if (it != cache.end()) return it->second;
        cplxld d = engine.partial(q, 1.0L);
        if (richardson) {
            const cplxld d_half = engine.partial(q, 0.5L);
            d = (16.0L * d_half - d) / 15.0L;  // the stencils are 4th order accurate
        }
        cache.emplace(q, d);
        return d;
    };

    Jet out = Jet::constant(sp, 0.0);
    for (int i = 0; i < sp->size(); ++i) {
        const auto& e = sp->exponent(i);
        // Expand prod_v (d/dz_v)^{a_v} (d/dzbar_v)^{b_v} into real partials.
        // Start with the trivial term and tensor one variable at a time.
        std::map<std::vector<int>, cplxld> terms;
        terms[std::vector<int>(static_cast<std::size_t>(2 * m), 0)] = 1.0L;
        for (int v = 0; v < m; ++v) {
            const int a = e[static_cast<std::size_t>(v)];
            const int b = e[static_cast<std::size_t>(v + m)];
            if (a == 0 && b == 0) continue;
            std::map<std::vector<int>, cplxld> next;
            for (int j = 0; j <= a; ++j) {
                for (int k = 0; k <= b; ++k) {
                    // (d/dx)^{j+k} (d/dy)^{a+b-j-k} coefficient
                    cplxld coef = detail::unit_ipow(-(a - j)) * detail::unit_ipow(b - k);
                    coef *= static_cast<long double>(detail::binom(a, j) * detail::binom(b, k)) *
                            std::pow(0.5L, static_cast<long double>(a + b));
                    for (const auto& [q, c] : terms) {
                        std::vector<int> q2 = q;
                        q2[static_cast<std::size_t>(v)] += j + k;
                        q2[static_cast<std::size_t>(v + m)] += a + b - j - k;
                        next[q2] += c * coef;
                    }
                }
            }
            terms = std::move(next);
        }
        cplxld deriv = 0.0L;
        for (const auto& [q, c] : terms) deriv += c * real_partial(q);
        const cplxld coeff = deriv / static_cast<long double>(sp->factorial_product(i));
        out.coeff(i) = cplx(static_cast<double>(coeff.real()), static_cast<double>(coeff.imag()));
    }
    if (!out.all_finite()) throw NonFiniteValue("finite-difference jet is non-finite");
    return out;
}

/// Jet of mixed Wirtinger derivatives of `f` at `p`, per the configured mode.
/// In cross-check mode the dual and FD jets must agree to 1e-5 relative on
/// every entry; the (more accurate) dual jet is returned.
inline Jet wirtinger_jet(const Field& f, std::span<const cplx> p, int order, const DiffConfig& cfg) {
    cfg.validate();
    if (static_cast<int>(p.size()) != f.arity()) throw ShapeMismatch("wirtinger_jet: point/arity mismatch");
    switch (cfg.mode) {
        case DiffMode::NestedDual:
            return dual_jet(f, p, order);
        case DiffMode::FiniteDifference:
            return fd_jet(f, p, order, cfg.fd_step, cfg.richardson);
        case DiffMode::CrossCheck: {
            const Jet a = dual_jet(f, p, order);
            const Jet b = fd_jet(f, p, order, cfg.fd_step, cfg.richardson);
            const auto& sp = a.space();
            for (int i = 0; i < sp->size(); ++i) {
                const double fa = sp->factorial_product(i);
                const cplx da = a.coeff(i) * fa;
                const cplx db = b.coeff(i) * fa;
                const double denom = std::max({1.0, std::abs(da), std::abs(db)});
                if (std::abs(da - db) > 1e-5 * denom) {
                    std::ostringstream msg;
                    msg << "cross-check mismatch on derivative #" << i << ": dual=" << da << " fd=" << db;
                    throw CrossCheckMismatch(msg.str(), std::abs(da), std::abs(db));
                }
            }
            return a;
        }
    }
    throw Error("unreachable diff mode");
}

}  // namespace bundlecurv
