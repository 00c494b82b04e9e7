#pragma once

// Dense complex tensors with typed index slots (fiber/base, barred/unbarred),
// Einstein contractions with inverse-metric weights, and Hermitian
// eigenproblems. Ranks and dimensions in scope are tiny (<= 8), so everything
// is dense and eager.

#include <Eigen/Dense>
#include <complex>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "bundlecurv/errors.hpp"
#include "bundlecurv/jet.hpp"

namespace bundlecurv {

enum class IndexKind { Fiber, FiberBar, Base, BaseBar };

inline IndexKind dual_kind(IndexKind k) {
    switch (k) {
        case IndexKind::Fiber: return IndexKind::FiberBar;
        case IndexKind::FiberBar: return IndexKind::Fiber;
        case IndexKind::Base: return IndexKind::BaseBar;
        case IndexKind::BaseBar: return IndexKind::Base;
    }
    throw Error("unreachable index kind");
}

inline bool is_barred(IndexKind k) { return k == IndexKind::FiberBar || k == IndexKind::BaseBar; }

class MultiIndexTensor {
public:
    MultiIndexTensor() = default;

    MultiIndexTensor(std::vector<IndexKind> kinds, std::vector<int> extents)
        : kinds_(std::move(kinds)), extents_(std::move(extents)) {
        if (kinds_.size() != extents_.size()) throw ShapeMismatch("tensor: kinds/extents length mismatch");
        std::size_t n = 1;
        for (int e : extents_) {
            if (e < 1) throw ShapeMismatch("tensor: extents must be positive");
            n *= static_cast<std::size_t>(e);
        }
        data_.assign(n, cplx{});
        strides_.assign(extents_.size(), 1);
        for (int s = static_cast<int>(extents_.size()) - 2; s >= 0; --s)
            strides_[static_cast<std::size_t>(s)] =
                strides_[static_cast<std::size_t>(s + 1)] * static_cast<std::size_t>(extents_[static_cast<std::size_t>(s + 1)]);
    }

    static MultiIndexTensor scalar(cplx v) {
        MultiIndexTensor t{{}, {}};
        t.data_.assign(1, v);
        return t;
    }

    int rank() const { return static_cast<int>(kinds_.size()); }
    const std::vector<IndexKind>& kinds() const { return kinds_; }
    const std::vector<int>& extents() const { return extents_; }
    IndexKind kind(int s) const { return kinds_[static_cast<std::size_t>(s)]; }
    int extent(int s) const { return extents_[static_cast<std::size_t>(s)]; }
    std::size_t size() const { return data_.size(); }

    cplx& at(std::span<const int> idx) { return data_[offset(idx)]; }
    cplx at(std::span<const int> idx) const { return data_[offset(idx)]; }
    cplx& at(std::initializer_list<int> idx) { return data_[offset(std::span<const int>(idx.begin(), idx.size()))]; }
    cplx at(std::initializer_list<int> idx) const { return data_[offset(std::span<const int>(idx.begin(), idx.size()))]; }

    cplx& flat(std::size_t i) { return data_[i]; }
    cplx flat(std::size_t i) const { return data_[i]; }

    /// Odometer increment over the index ranges; start from all zeros.
    bool next_index(std::vector<int>& idx) const {
        for (int s = rank() - 1; s >= 0; --s) {
            if (++idx[static_cast<std::size_t>(s)] < extent(s)) return true;
            idx[static_cast<std::size_t>(s)] = 0;
        }
        return false;
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& x : data_) m = std::max(m, std::abs(x));
        return m;
    }

    bool all_finite() const {
        for (const auto& x : data_)
            if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
        return true;
    }

    MultiIndexTensor& operator+=(const MultiIndexTensor& o) {
        require_same_shape(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    MultiIndexTensor& operator-=(const MultiIndexTensor& o) {
        require_same_shape(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    MultiIndexTensor& operator*=(cplx s) {
        for (auto& x : data_) x *= s;
        return *this;
    }
    friend MultiIndexTensor operator+(MultiIndexTensor a, const MultiIndexTensor& b) { return a += b; }
    friend MultiIndexTensor operator-(MultiIndexTensor a, const MultiIndexTensor& b) { return a -= b; }
    friend MultiIndexTensor operator*(MultiIndexTensor a, cplx s) { return a *= s; }
    friend MultiIndexTensor operator*(cplx s, MultiIndexTensor a) { return a *= s; }

    /// Max deviation from T[..p..q..] = conj(T[..q..p..]) over the given
    /// (slot, slot) conjugation pairs, i.e. the Hermitian-symmetry defect.
    double hermitian_defect(std::span<const std::pair<int, int>> pairs) const {
        for (const auto& [a, b] : pairs) {
            if (extent(a) != extent(b) || kind(a) != dual_kind(kind(b)))
                throw ShapeMismatch("hermitian_defect: pairs must couple dual slots of equal extent");
        }
        double worst = 0.0;
        std::vector<int> idx(static_cast<std::size_t>(rank()), 0);
        std::vector<int> swapped(idx);
        do {
            swapped = idx;
            for (const auto& [a, b] : pairs)
                std::swap(swapped[static_cast<std::size_t>(a)], swapped[static_cast<std::size_t>(b)]);
            worst = std::max(worst, std::abs(at(idx) - std::conj(at(swapped))));
        } while (next_index(idx));
        return worst;
    }

    /// Flatten to a matrix: row index runs over `row_slots` (row-major, first
    /// slot slowest), column index over `col_slots`. Every slot must appear
    /// exactly once across the two lists.
    Eigen::MatrixXcd flatten(std::span<const int> row_slots, std::span<const int> col_slots) const {
        std::vector<char> seen(static_cast<std::size_t>(rank()), 0);
        for (int s : row_slots) seen.at(static_cast<std::size_t>(s))++;
        for (int s : col_slots) seen.at(static_cast<std::size_t>(s))++;
        for (char c : seen)
            if (c != 1) throw ShapeMismatch("flatten: slots must partition the tensor rank");
        long nr = 1, nc = 1;
        for (int s : row_slots) nr *= extent(s);
        for (int s : col_slots) nc *= extent(s);
        Eigen::MatrixXcd out(nr, nc);
        std::vector<int> idx(static_cast<std::size_t>(rank()), 0);
        do {
            long r = 0, c = 0;
            for (int s : row_slots) r = r * extent(s) + idx[static_cast<std::size_t>(s)];
            for (int s : col_slots) c = c * extent(s) + idx[static_cast<std::size_t>(s)];
            out(r, c) = at(idx);
        } while (next_index(idx));
        return out;
    }

private:
    std::size_t offset(std::span<const int> idx) const {
        if (static_cast<int>(idx.size()) != rank()) throw ShapeMismatch("tensor: index rank mismatch");
        std::size_t o = 0;
        for (int s = 0; s < rank(); ++s) {
            const int k = idx[static_cast<std::size_t>(s)];
            if (k < 0 || k >= extent(s)) throw ShapeMismatch("tensor: index out of range");
            o += strides_[static_cast<std::size_t>(s)] * static_cast<std::size_t>(k);
        }
        return o;
    }

    void require_same_shape(const MultiIndexTensor& o) const {
        if (kinds_ != o.kinds_ || extents_ != o.extents_) throw ShapeMismatch("tensor: shape mismatch");
    }

    std::vector<IndexKind> kinds_;
    std::vector<int> extents_;
    std::vector<std::size_t> strides_;
    std::vector<cplx> data_;
};

inline MultiIndexTensor outer(const MultiIndexTensor& a, const MultiIndexTensor& b) {
    std::vector<IndexKind> kinds(a.kinds());
    kinds.insert(kinds.end(), b.kinds().begin(), b.kinds().end());
    std::vector<int> extents(a.extents());
    extents.insert(extents.end(), b.extents().begin(), b.extents().end());
    MultiIndexTensor out(std::move(kinds), std::move(extents));
    std::vector<int> ia(static_cast<std::size_t>(a.rank()), 0);
    do {
        std::vector<int> ib(static_cast<std::size_t>(b.rank()), 0);
        do {
            std::vector<int> io(ia);
            io.insert(io.end(), ib.begin(), ib.end());
            out.at(io) = a.at(ia) * b.at(ib);
        } while (b.next_index(ib));
    } while (a.next_index(ia));
    return out;
}

namespace detail {

inline void check_contraction_pair(const MultiIndexTensor& t, int a, int b) {
    if (a < 0 || b < 0 || a >= t.rank() || b >= t.rank() || a == b)
        throw ShapeMismatch("contract: invalid slot pair");
    if (t.extent(a) != t.extent(b)) throw ShapeMismatch("contract: paired extents differ");
    if (t.kind(a) != dual_kind(t.kind(b))) throw ShapeMismatch("contract: paired kinds are not dual");
}

inline MultiIndexTensor drop_two_slots(const MultiIndexTensor& t, int a, int b) {
    std::vector<IndexKind> kinds;
    std::vector<int> extents;
    for (int s = 0; s < t.rank(); ++s) {
        if (s == a || s == b) continue;
        kinds.push_back(t.kind(s));
        extents.push_back(t.extent(s));
    }
    return MultiIndexTensor(std::move(kinds), std::move(extents));
}

}  // namespace detail

/// Plain Einstein contraction of two dual slots: out[..] = sum_p t[.. p .. p ..].
inline MultiIndexTensor contract(const MultiIndexTensor& t, int slot_a, int slot_b) {
    detail::check_contraction_pair(t, slot_a, slot_b);
    MultiIndexTensor out = detail::drop_two_slots(t, slot_a, slot_b);
    std::vector<int> io(static_cast<std::size_t>(out.rank()), 0);
    std::vector<int> it(static_cast<std::size_t>(t.rank()), 0);
    do {
        cplx acc = 0.0;
        for (int p = 0; p < t.extent(slot_a); ++p) {
            int w = 0;
            for (int s = 0; s < t.rank(); ++s) {
                if (s == slot_a || s == slot_b)
                    it[static_cast<std::size_t>(s)] = p;
                else
                    it[static_cast<std::size_t>(s)] = io[static_cast<std::size_t>(w++)];
            }
            acc += t.at(it);
        }
        out.at(io) = acc;
    } while (out.rank() > 0 && out.next_index(io));
    return out;
}

/// Factorization of a Hermitian metric used to weight contractions by its
/// inverse without forming the inverse explicitly. Rejects non-Hermitian
/// input (1e-10) and condition numbers beyond 1e13.
class InverseMetricWeight {
public:
    explicit InverseMetricWeight(const Eigen::MatrixXcd& m) : m_(m) {
        if (m.rows() != m.cols()) throw ShapeMismatch("metric must be square");
        const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
        if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
            throw NotHermitian("metric weight is not Hermitian");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
        const auto& ev = es.eigenvalues();
        const double lo = ev.cwiseAbs().minCoeff();
        const double hi = ev.cwiseAbs().maxCoeff();
        cond_ = (lo == 0.0) ? std::numeric_limits<double>::infinity() : hi / lo;
        if (cond_ > 1e13) throw SingularMetric("metric condition number exceeds 1e13");
        // conj(m) is Hermitian with the same spectrum; its solve implements
        // sum_{p,q} T(p,q) * inv(m)(p,q) = trace(solve(conj(m), T)).
        ldlt_.compute(m.conjugate());
    }

    double condition_number() const { return cond_; }

    /// sum_{p,q} inv(m)(p,q) * block(p,q)
    cplx pair(const Eigen::MatrixXcd& block) const { return ldlt_.solve(block).trace(); }

private:
    Eigen::MatrixXcd m_;
    Eigen::LDLT<Eigen::MatrixXcd> ldlt_;
    double cond_ = 0.0;
};

/// Contraction of a barred slot against an unbarred slot through the inverse
/// of `metric`, where metric(a,b) = M_{a bbar}:
///   out[..] = sum_{p,q} t[.. pbar .. q ..] * inv(metric)(p,q),
/// the inverse entry being M^{pbar q} (so M_{a pbar} M^{pbar q} = delta_a^q).
inline MultiIndexTensor contract(const MultiIndexTensor& t, int barred_slot, int unbarred_slot,
                                 const InverseMetricWeight& w, int metric_dim) {
    detail::check_contraction_pair(t, barred_slot, unbarred_slot);
    if (!is_barred(t.kind(barred_slot)) || is_barred(t.kind(unbarred_slot)))
        throw ShapeMismatch("contract: weighted pair must be (barred, unbarred)");
    if (t.extent(barred_slot) != metric_dim) throw ShapeMismatch("contract: metric dimension mismatch");

    MultiIndexTensor out = detail::drop_two_slots(t, barred_slot, unbarred_slot);
    const int n = metric_dim;
    std::vector<int> io(static_cast<std::size_t>(out.rank()), 0);
    std::vector<int> it(static_cast<std::size_t>(t.rank()), 0);
    Eigen::MatrixXcd block(n, n);
    do {
        for (int p = 0; p < n; ++p) {
            for (int q = 0; q < n; ++q) {
                int wpos = 0;
                for (int s = 0; s < t.rank(); ++s) {
                    if (s == barred_slot)
                        it[static_cast<std::size_t>(s)] = p;
                    else if (s == unbarred_slot)
                        it[static_cast<std::size_t>(s)] = q;
                    else
                        it[static_cast<std::size_t>(s)] = io[static_cast<std::size_t>(wpos++)];
                }
                block(p, q) = t.at(it);
            }
        }
        out.at(io) = w.pair(block);
    } while (out.rank() > 0 && out.next_index(io));
    return out;
}

inline MultiIndexTensor contract(const MultiIndexTensor& t, int barred_slot, int unbarred_slot,
                                 const Eigen::MatrixXcd& metric) {
    return contract(t, barred_slot, unbarred_slot, InverseMetricWeight(metric), static_cast<int>(metric.rows()));
}

// ---------------------------------------------------------------------------
// Hermitian eigenproblems.

struct EigenResult {
    Eigen::VectorXd values;    ///< ascending
    Eigen::MatrixXcd vectors;  ///< columns, metric-orthonormal
};

namespace detail {

inline void require_hermitian(const Eigen::MatrixXcd& m, const char* what) {
    if (m.rows() != m.cols()) throw ShapeMismatch(std::string(what) + " is not square");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw NotHermitian(std::string(what) + " deviates from Hermitian symmetry beyond 1e-10");
}

}  // namespace detail

/// Eigenpairs of the (generalized) Hermitian problem M x = lambda N x.
/// `metric` (N), when given, must be Hermitian positive definite.
inline EigenResult hermitian_eigen(const Eigen::MatrixXcd& m, const Eigen::MatrixXcd* metric = nullptr) {
    detail::require_hermitian(m, "matrix");
    EigenResult out;
    if (metric == nullptr) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
        if (es.info() != Eigen::Success) throw Error("eigensolver failed to converge");
        out.values = es.eigenvalues();
        out.vectors = es.eigenvectors();
    } else {
        detail::require_hermitian(*metric, "metric");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ms(*metric, Eigen::EigenvaluesOnly);
        if (ms.info() != Eigen::Success || ms.eigenvalues().minCoeff() <= 0.0)
            throw MetricNotPositive("eigenproblem metric is not positive definite");
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, *metric);
        if (es.info() != Eigen::Success) throw Error("generalized eigensolver failed to converge");
        out.values = es.eigenvalues();
        out.vectors = es.eigenvectors();
    }
    // Defensive residual audit: || M x - lambda N x || <= 1e-9 ||M||.
    const double mnorm = m.norm();
    for (int k = 0; k < out.values.size(); ++k) {
        const Eigen::VectorXcd x = out.vectors.col(k);
        const Eigen::VectorXcd nx = metric ? Eigen::VectorXcd(*metric * x) : x;
        const double resid = (m * x - out.values[k] * nx).norm();
        if (!(resid <= 1e-9 * std::max(1.0, mnorm)))
            throw Error("eigenpair residual exceeds 1e-9 tolerance");
    }
    return out;
}

inline EigenResult hermitian_eigen(const Eigen::MatrixXcd& m, const Eigen::MatrixXcd& metric) {
    return hermitian_eigen(m, &metric);
}

}  // namespace bundlecurv
