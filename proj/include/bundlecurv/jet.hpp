#pragma once

// Truncated Wirtinger jets: the workhorse for every derivative in the library.
//
// A Jet over m complex variables stores the Taylor coefficients c[a,b] of
//   f(p + h) = sum_{|a|+|b| <= K} c[a,b] * h^a * conj(h)^b
// where a and b are multi-indices over the m variables ("a" counts holomorphic
// directions d/dz_i, "b" antiholomorphic d/dzbar_i). Mixed Wirtinger
// derivatives are read off as  d^{a,b} f = a! b! c[a,b].
//
// Arithmetic on jets is exact truncated polynomial arithmetic, so evaluating a
// composite expression in jet arithmetic yields machine-precision derivatives
// (forward-mode automatic differentiation in conjugate-aware form).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "bundlecurv/errors.hpp"

namespace bundlecurv {

using cplx = std::complex<double>;

/// Enumerates the graded monomial basis for (nvars complex variables, total
/// order <= K) and precomputes multiplication/derivative tables. Instances are
/// cached and shared; jets hold a pointer to their space.
class JetSpace {
public:
    static constexpr int kMaxOrder = 6;
    static constexpr int kMaxVars = 8;

    static std::shared_ptr<const JetSpace> get(int nvars, int order) {
        if (nvars < 1 || nvars > kMaxVars) throw ShapeMismatch("JetSpace: variable count out of range [1,8]");
        if (order < 0 || order > kMaxOrder) throw ShapeMismatch("JetSpace: order out of range [0,6]");
        static std::mutex mutex;
        static std::map<std::pair<int, int>, std::shared_ptr<const JetSpace>> cache;
        std::lock_guard<std::mutex> lock(mutex);
        auto& slot = cache[{nvars, order}];
        if (!slot) slot = std::shared_ptr<const JetSpace>(new JetSpace(nvars, order));
        return slot;
    }

    int nvars() const { return nvars_; }
    int order() const { return order_; }
    int size() const { return static_cast<int>(exps_.size()); }

    /// Exponent vector of basis monomial #i: slots [0,m) holomorphic, [m,2m) anti.
    const std::vector<std::uint8_t>& exponent(int i) const { return exps_[static_cast<std::size_t>(i)]; }

    int index_of(const std::vector<std::uint8_t>& e) const {
        auto it = index_.find(key(e));
        return it == index_.end() ? -1 : it->second;
    }

    /// a!b! for basis monomial #i (derivative = coefficient * factorial product).
    double factorial_product(int i) const { return fact_[static_cast<std::size_t>(i)]; }

    /// Index of the monomial with holomorphic/antiholomorphic slots swapped.
    int conj_index(int i) const { return conj_[static_cast<std::size_t>(i)]; }

    /// Index of exponent(i) + unit in `slot`, or -1 if that leaves the space.
    int raise_index(int i, int slot) const { return raise_[static_cast<std::size_t>(slot)][static_cast<std::size_t>(i)]; }

    struct MulEntry {
        std::int32_t a, b, out;
    };
    const std::vector<MulEntry>& mul_table() const { return mul_; }

private:
    JetSpace(int nvars, int order) : nvars_(nvars), order_(order) {
        const int slots = 2 * nvars;
        // Graded enumeration of exponent vectors with |e| <= order.
        std::vector<std::uint8_t> e(static_cast<std::size_t>(slots), 0);
        enumerate(e, 0, order);
        std::stable_sort(exps_.begin(), exps_.end(), [](const auto& x, const auto& y) {
            const int dx = std::accumulate(x.begin(), x.end(), 0);
            const int dy = std::accumulate(y.begin(), y.end(), 0);
            if (dx != dy) return dx < dy;
            return x < y;
        });
        for (int i = 0; i < size(); ++i) index_[key(exps_[static_cast<std::size_t>(i)])] = i;

        fact_.resize(exps_.size());
        conj_.resize(exps_.size());
        for (int i = 0; i < size(); ++i) {
            double f = 1.0;
            for (std::uint8_t a : exps_[static_cast<std::size_t>(i)])
                for (int k = 2; k <= a; ++k) f *= k;
            fact_[static_cast<std::size_t>(i)] = f;
            std::vector<std::uint8_t> sw(exps_[static_cast<std::size_t>(i)]);
            for (int v = 0; v < nvars_; ++v) std::swap(sw[static_cast<std::size_t>(v)], sw[static_cast<std::size_t>(v + nvars_)]);
            conj_[static_cast<std::size_t>(i)] = index_.at(key(sw));
        }

        raise_.assign(static_cast<std::size_t>(slots), std::vector<std::int32_t>(exps_.size(), -1));
        for (int i = 0; i < size(); ++i) {
            for (int s = 0; s < slots; ++s) {
                std::vector<std::uint8_t> up(exps_[static_cast<std::size_t>(i)]);
                up[static_cast<std::size_t>(s)]++;
                auto it = index_.find(key(up));
                if (it != index_.end()) raise_[static_cast<std::size_t>(s)][static_cast<std::size_t>(i)] = it->second;
            }
        }

        for (int i = 0; i < size(); ++i) {
            const int di = degree(i);
            for (int j = 0; j < size(); ++j) {
                if (di + degree(j) > order_) continue;
                std::vector<std::uint8_t> sum(exps_[static_cast<std::size_t>(i)]);
                for (int s = 0; s < slots; ++s) sum[static_cast<std::size_t>(s)] += exps_[static_cast<std::size_t>(j)][static_cast<std::size_t>(s)];
                mul_.push_back({i, j, index_.at(key(sum))});
            }
        }
    }

    int degree(int i) const {
        const auto& e = exps_[static_cast<std::size_t>(i)];
        return std::accumulate(e.begin(), e.end(), 0);
    }

    void enumerate(std::vector<std::uint8_t>& e, int slot, int budget) {
        if (slot == static_cast<int>(e.size())) {
            exps_.push_back(e);
            return;
        }
        for (int k = 0; k <= budget; ++k) {
            e[static_cast<std::size_t>(slot)] = static_cast<std::uint8_t>(k);
            enumerate(e, slot + 1, budget - k);
        }
        e[static_cast<std::size_t>(slot)] = 0;
    }

    static std::uint64_t key(const std::vector<std::uint8_t>& e) {
        std::uint64_t k = 0;
        for (std::uint8_t a : e) k = (k << 4) | a;
        return k;
    }

    int nvars_;
    int order_;
    std::vector<std::vector<std::uint8_t>> exps_;
    std::unordered_map<std::uint64_t, int> index_;
    std::vector<double> fact_;
    std::vector<int> conj_;
    std::vector<std::vector<std::int32_t>> raise_;
    std::vector<MulEntry> mul_;
};

class Jet {
public:
    Jet() = default;

    static Jet constant(std::shared_ptr<const JetSpace> sp, cplx value) {
        Jet j(std::move(sp));
        j.c_[0] = value;
        return j;
    }

    /// Coordinate function for variable #var (0-based) at base point `value`.
    static Jet variable(std::shared_ptr<const JetSpace> sp, int var, cplx value) {
        if (var < 0 || var >= sp->nvars()) throw ShapeMismatch("Jet::variable: index out of range");
        Jet j(std::move(sp));
        j.c_[0] = value;
        if (j.sp_->order() >= 1) {
            std::vector<std::uint8_t> e(static_cast<std::size_t>(2 * j.sp_->nvars()), 0);
            e[static_cast<std::size_t>(var)] = 1;
            j.c_[static_cast<std::size_t>(j.sp_->index_of(e))] = 1.0;
        }
        return j;
    }

    const std::shared_ptr<const JetSpace>& space() const { return sp_; }
    cplx value() const { return c_.empty() ? cplx{} : c_[0]; }

    cplx coeff(int i) const { return c_[static_cast<std::size_t>(i)]; }
    cplx& coeff(int i) { return c_[static_cast<std::size_t>(i)]; }

    /// Mixed Wirtinger derivative d^{|holo|+|anti|} f / dz^holo dzbar^anti.
    /// Multi-indices are per complex variable, length nvars().
    cplx deriv(std::span<const int> holo, std::span<const int> anti) const {
        const int m = sp_->nvars();
        if (static_cast<int>(holo.size()) != m || static_cast<int>(anti.size()) != m)
            throw ShapeMismatch("Jet::deriv: multi-index length mismatch");
        std::vector<std::uint8_t> e(static_cast<std::size_t>(2 * m), 0);
        for (int i = 0; i < m; ++i) {
            e[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(holo[static_cast<std::size_t>(i)]);
            e[static_cast<std::size_t>(i + m)] = static_cast<std::uint8_t>(anti[static_cast<std::size_t>(i)]);
        }
        const int idx = sp_->index_of(e);
        if (idx < 0) throw ShapeMismatch("Jet::deriv: order exceeds jet order");
        return c_[static_cast<std::size_t>(idx)] * sp_->factorial_product(idx);
    }

    /// First derivative d/dz_var (anti=false) or d/dzbar_var (anti=true).
    cplx d1(int var, bool anti = false) const {
        std::vector<int> h(static_cast<std::size_t>(sp_->nvars()), 0), a(h);
        (anti ? a : h)[static_cast<std::size_t>(var)] = 1;
        return deriv(h, a);
    }

    /// Mixed second derivative d^2/dz_i dzbar_j.
    cplx d2(int i, int jbar) const {
        std::vector<int> h(static_cast<std::size_t>(sp_->nvars()), 0), a(h);
        h[static_cast<std::size_t>(i)] += 1;
        a[static_cast<std::size_t>(jbar)] += 1;
        return deriv(h, a);
    }

    /// Derivative as a jet of one order less (same variables). `anti` selects
    /// d/dzbar_var. The result lives in JetSpace(nvars, order-1).
    Jet derivative(int var, bool anti = false) const {
        auto lower = JetSpace::get(sp_->nvars(), sp_->order() - 1);
        Jet out(lower);
        const int slot = anti ? var + sp_->nvars() : var;
        for (int i = 0; i < lower->size(); ++i) {
            // coefficient of e in f' equals (e[slot]+1) * coeff of e+slot in f.
            std::vector<std::uint8_t> e(lower->exponent(i));
            e[static_cast<std::size_t>(slot)]++;
            const int src = sp_->index_of(e);
            if (src >= 0)
                out.c_[static_cast<std::size_t>(i)] =
                    c_[static_cast<std::size_t>(src)] * static_cast<double>(e[static_cast<std::size_t>(slot)]);
        }
        return out;
    }

    /// Copy truncated to a lower order (same variables).
    Jet truncated(int new_order) const {
        if (new_order > sp_->order()) throw ShapeMismatch("Jet::truncated: cannot raise order");
        if (new_order == sp_->order()) return *this;
        auto lower = JetSpace::get(sp_->nvars(), new_order);
        Jet out(lower);
        for (int i = 0; i < lower->size(); ++i) {
            const int src = sp_->index_of(lower->exponent(i));
            out.c_[static_cast<std::size_t>(i)] = c_[static_cast<std::size_t>(src)];
        }
        return out;
    }

    Jet conj() const {
        Jet out(sp_);
        for (int i = 0; i < sp_->size(); ++i)
            out.c_[static_cast<std::size_t>(sp_->conj_index(i))] = std::conj(c_[static_cast<std::size_t>(i)]);
        return out;
    }

    Jet operator-() const {
        Jet out(*this);
        for (auto& x : out.c_) x = -x;
        return out;
    }

    Jet& operator+=(const Jet& o) {
        check_space(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
        return *this;
    }
    Jet& operator-=(const Jet& o) {
        check_space(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
        return *this;
    }
    Jet& operator*=(cplx s) {
        for (auto& x : c_) x *= s;
        return *this;
    }

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator+(Jet a, cplx s) {
        a.c_[0] += s;
        return a;
    }
    friend Jet operator+(cplx s, Jet a) {
        a.c_[0] += s;
        return a;
    }
    friend Jet operator-(Jet a, cplx s) {
        a.c_[0] -= s;
        return a;
    }
    friend Jet operator-(cplx s, const Jet& a) { return (-a) + s; }
    friend Jet operator*(Jet a, cplx s) { return a *= s; }
    friend Jet operator*(cplx s, Jet a) { return a *= s; }

    friend Jet operator*(const Jet& a, const Jet& b) {
        a.check_space(b);
        Jet out(a.sp_);
        for (const auto& m : a.sp_->mul_table()) {
            out.c_[static_cast<std::size_t>(m.out)] +=
                a.c_[static_cast<std::size_t>(m.a)] * b.c_[static_cast<std::size_t>(m.b)];
        }
        return out;
    }

    friend Jet operator/(const Jet& a, const Jet& b) { return a * b.inverse(); }
    friend Jet operator/(Jet a, cplx s) {
        if (std::abs(s) < 1e-12) throw DomainError("division by near-zero constant");
        return a *= (1.0 / s);
    }
    friend Jet operator/(cplx s, const Jet& b) { return b.inverse() * s; }

    /// Multiplicative inverse; guards |value| < 1e-12.
    Jet inverse() const {
        const cplx v0 = value();
        if (std::abs(v0) < 1e-12) throw DomainError("jet inverse: value modulus below 1e-12");
        // 1/(v0(1+w)) = (1/v0) sum (-w)^k with w nilpotent.
        Jet w = *this * (1.0 / v0);
        w.c_[0] = 0.0;
        Jet acc = Jet::constant(sp_, 1.0);
        Jet pw = Jet::constant(sp_, 1.0);
        for (int k = 1; k <= sp_->order(); ++k) {
            pw = pw * w;
            acc += (k % 2 ? -pw : pw);
        }
        return acc * (1.0 / v0);
    }

    /// Principal-branch logarithm; guards |value| < 1e-12.
    Jet log() const {
        const cplx v0 = value();
        if (std::abs(v0) < 1e-12) throw DomainError("jet log: value modulus below 1e-12");
        Jet w = *this * (1.0 / v0);
        w.c_[0] = 0.0;
        Jet acc = Jet::constant(sp_, std::log(v0));
        Jet pw = Jet::constant(sp_, 1.0);
        for (int k = 1; k <= sp_->order(); ++k) {
            pw = pw * w;
            acc += pw * (((k + 1) % 2 ? -1.0 : 1.0) / static_cast<double>(k));
        }
        return acc;
    }

    Jet exp() const {
        Jet w = *this;
        w.c_[0] = 0.0;
        Jet acc = Jet::constant(sp_, 1.0);
        Jet pw = Jet::constant(sp_, 1.0);
        double fact = 1.0;
        for (int k = 1; k <= sp_->order(); ++k) {
            pw = pw * w;
            fact *= k;
            acc += pw * (1.0 / fact);
        }
        return acc * std::exp(value());
    }

    /// Integer power; negative exponents go through inverse().
    Jet pow_int(int p) const {
        if (p < 0) return inverse().pow_int(-p);
        Jet acc = Jet::constant(sp_, 1.0);
        Jet base = *this;
        for (int e = p; e > 0; e >>= 1) {
            if (e & 1) acc = acc * base;
            if (e > 1) base = base * base;
        }
        return acc;
    }

    /// |f|^2 = f * conj(f).
    Jet abs2() const { return (*this) * conj(); }

    bool all_finite() const {
        for (const auto& x : c_)
            if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
        return true;
    }

    double max_abs_coeff() const {
        double m = 0.0;
        for (const auto& x : c_) m = std::max(m, std::abs(x));
        return m;
    }

private:
    explicit Jet(std::shared_ptr<const JetSpace> sp) : sp_(std::move(sp)), c_(static_cast<std::size_t>(sp_->size()), cplx{}) {}

    void check_space(const Jet& o) const {
        if (sp_.get() != o.sp_.get()) throw ShapeMismatch("jet arithmetic requires a common jet space");
    }

    std::shared_ptr<const JetSpace> sp_;
    std::vector<cplx> c_;
};

}  // namespace bundlecurv
