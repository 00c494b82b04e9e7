#pragma once

// A Field is a smooth (not necessarily holomorphic) complex-valued function of
// several complex variables. Every field must be evaluable two independent
// ways:
//   * in jet arithmetic (drives the nested-dual derivative path), and
//   * pointwise in extended precision (drives the finite-difference oracle,
//     where the extra mantissa bits keep 4th-order stencils meaningful).

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "bundlecurv/jet.hpp"

namespace bundlecurv {

using cplxld = std::complex<long double>;

class Field {
public:
    virtual ~Field() = default;

    /// Number of complex variables the field depends on.
    virtual int arity() const = 0;

    /// Evaluate in jet arithmetic at the base point `p` (size == arity()).
    virtual Jet eval_jet(const std::shared_ptr<const JetSpace>& sp, std::span<const cplx> p) const = 0;

    /// Plain extended-precision evaluation (finite-difference path).
    virtual cplxld eval_scalar(std::span<const cplxld> p) const = 0;
};

/// Adapter for building fields from two callables:
///   fjet(std::span<const Jet> vars) -> Jet
///   fscalar(std::span<const cplxld> vars) -> cplxld
template <class FJet, class FScalar>
class LambdaField final : public Field {
public:
    LambdaField(int arity, FJet fjet, FScalar fscalar)
        : arity_(arity), fjet_(std::move(fjet)), fscalar_(std::move(fscalar)) {}

    int arity() const override { return arity_; }

    Jet eval_jet(const std::shared_ptr<const JetSpace>& sp, std::span<const cplx> p) const override {
        std::vector<Jet> vars;
        vars.reserve(p.size());
        for (int i = 0; i < arity_; ++i) vars.push_back(Jet::variable(sp, i, p[static_cast<std::size_t>(i)]));
        return fjet_(std::span<const Jet>(vars));
    }

    cplxld eval_scalar(std::span<const cplxld> p) const override { return fscalar_(p); }

private:
    int arity_;
    FJet fjet_;
    FScalar fscalar_;
};

template <class FJet, class FScalar>
std::shared_ptr<Field> make_field(int arity, FJet fjet, FScalar fscalar) {
    return std::make_shared<LambdaField<FJet, FScalar>>(arity, std::move(fjet), std::move(fscalar));
}

}  // namespace bundlecurv
