#pragma once
// Spectral machinery on the model torus fiber.
//
// The fiber is C/(Z + tau Z), Im tau > 0, coordinate w, with the level-one
// theta line bundle: theta(w) = sum_m exp(i pi tau m^2 + 2 pi i m w), weight
// e^{-phi} with phi = 2 pi (Im w)^2 / Im tau. The curvature phi_{w wbar} =
// pi / Im tau is the flat fiber metric; fixing b = Im tau:
//
//   * scalar sector: lattice characters chi_{m1 m2} = e^{2 pi i (m1 s1 +
//     m2 s2)} in the real coordinates w = s1 + tau s2 diagonalize
//     box = -(b/pi) d_w d_wbar with eigenvalue (pi/b) |m2 - m1 tau|^2.
//     The metric volume form is 2 (pi/b) dx dy = 2 pi ds1 ds2, so the
//     characters have norm^2 = 2 pi.
//   * section/form sector: bundle-valued objects pair with the plain area
//     i dw wedge dwbar = 2 dx dy times e^{-phi} (the tangent-space factors
//     cancel for (0,1)-forms in one fiber dimension). With D = d_w - phi_w
//     the ladder f_kappa = D^kappa theta spans the form sector level by
//     level; [d_wbar, D] = -phi_{w wbar} gives
//
//       box' (f dwbar) = (-(b/pi) d_wbar D f) dwbar,
//       box' f_kappa = (kappa + 1) f_kappa,
//       ||f_kappa||^2 = kappa! (pi/b)^kappa ||theta||^2.
//
//     In particular the holomorphic bottom level theta dwbar has eigenvalue
//     exactly 1. Both spectra are validated at build time by applying the
//     chart differential operators through finite differences and rejecting
//     the basis when the pointwise residual exceeds 1e-6.
//
// Quadrature is the uniform grid in (s1, s2); every integrand that appears
// (products of characters, |theta-sector| densities times e^{-phi}) is
// smooth and doubly periodic, so the trapezoid sums converge faster than any
// power and the character Gram is exact by discrete Fourier orthogonality.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bundlecurv/check.hpp"
#include "bundlecurv/errors.hpp"
#include "bundlecurv/families.hpp"
#include "bundlecurv/threading.hpp"

namespace bundlecurv {

struct TorusBasis {
    cplx tau;
    int mode_box = 32;     ///< characters with |m1|, |m2| <= mode_box
    int grid_n = 128;      ///< grid_n x grid_n points in (s1, s2)
    int theta_trunc = 12;  ///< theta series truncated at |m| <= theta_trunc
    int landau_count = 12; ///< form-sector levels 0 .. landau_count-1

    std::vector<Eigen::MatrixXcd> landau;  ///< cached level fields on the grid
    Eigen::MatrixXcd landau_gram;          ///< quadrature Gram of the levels
    /// Ladder polynomials: coeffs[m + theta_trunc][kappa] are the y =
    /// Im w polynomial coefficients multiplying exp(i pi tau m^2 + 2 pi i m w)
    /// in D^kappa theta.
    std::vector<std::vector<std::vector<cplx>>> ladder;

    double b() const { return tau.imag(); }
    double metric_coefficient() const { return 3.14159265358979323846 / b(); }

    cplx grid_point(int i, int j) const {
        return cplx(static_cast<double>(i) / grid_n, 0.0) + tau * (static_cast<double>(j) / grid_n);
    }
    /// Metric volume of one grid cell (scalar sector): 2 pi / N^2.
    double scalar_cell() const { return 2.0 * 3.14159265358979323846 / (static_cast<double>(grid_n) * grid_n); }
    /// Plain area of one cell (section/form sector): 2 b / N^2.
    double section_cell() const { return 2.0 * b() / (static_cast<double>(grid_n) * grid_n); }
    /// e^{-phi} at a grid point.
    double weight(int j) const {
        const double s2 = static_cast<double>(j) / grid_n;
        return std::exp(-2.0 * 3.14159265358979323846 * b() * s2 * s2);
    }
    double weight_at(cplx w) const {
        const double y = w.imag();
        return std::exp(-2.0 * 3.14159265358979323846 * y * y / b());
    }

    // -- scalar sector ------------------------------------------------------

    double scalar_eigenvalue(int m1, int m2) const {
        return metric_coefficient() * std::norm(cplx(static_cast<double>(m2), 0.0) - static_cast<double>(m1) * tau);
    }
    int scalar_mode_count() const { return (2 * mode_box + 1) * (2 * mode_box + 1); }
    int scalar_index(int m1, int m2) const { return (m1 + mode_box) * (2 * mode_box + 1) + (m2 + mode_box); }

    /// Unnormalized character value at grid point (i, j).
    cplx character(int m1, int m2, int i, int j) const {
        const double pi = 3.14159265358979323846;
        const double arg = 2.0 * pi * (m1 * static_cast<double>(i) + m2 * static_cast<double>(j)) / grid_n;
        return std::polar(1.0, arg);
    }

    cplx scalar_inner(const Eigen::MatrixXcd& f, const Eigen::MatrixXcd& g) const {
        return (f.array() * g.array().conjugate()).sum() * scalar_cell();
    }
    double scalar_norm_sq(const Eigen::MatrixXcd& f) const { return scalar_inner(f, f).real(); }

    /// Coefficients in the L2-normalized characters chi / sqrt(2 pi).
    Eigen::VectorXcd scalar_project_coeffs(const Eigen::MatrixXcd& f) const {
        if (f.rows() != grid_n || f.cols() != grid_n) throw ShapeMismatch("scalar project: field does not match grid");
        const double pi = 3.14159265358979323846;
        const int B = mode_box;
        Eigen::MatrixXcd partial(2 * B + 1, grid_n);  // sum over i for each m1
        for (int m1 = -B; m1 <= B; ++m1)
            for (int j = 0; j < grid_n; ++j) {
                cplx acc{};
                for (int i = 0; i < grid_n; ++i)
                    acc += f(i, j) * std::polar(1.0, -2.0 * pi * m1 * static_cast<double>(i) / grid_n);
                partial(m1 + B, j) = acc;
            }
        Eigen::VectorXcd coeffs(scalar_mode_count());
        const double norm = scalar_cell() / std::sqrt(2.0 * pi);
        for (int m1 = -B; m1 <= B; ++m1)
            for (int m2 = -B; m2 <= B; ++m2) {
                cplx acc{};
                for (int j = 0; j < grid_n; ++j)
                    acc += partial(m1 + B, j) * std::polar(1.0, -2.0 * pi * m2 * static_cast<double>(j) / grid_n);
                coeffs(scalar_index(m1, m2)) = acc * norm;
            }
        return coeffs;
    }

    Eigen::MatrixXcd scalar_synthesize(const Eigen::VectorXcd& coeffs) const {
        if (coeffs.size() != scalar_mode_count()) throw ShapeMismatch("scalar synthesize: coefficient count mismatch");
        const double pi = 3.14159265358979323846;
        const int B = mode_box;
        const double norm = 1.0 / std::sqrt(2.0 * pi);
        Eigen::MatrixXcd partial = Eigen::MatrixXcd::Zero(2 * B + 1, grid_n);  // per m1, synthesized over m2
        for (int m1 = -B; m1 <= B; ++m1)
            for (int j = 0; j < grid_n; ++j) {
                cplx acc{};
                for (int m2 = -B; m2 <= B; ++m2)
                    acc += coeffs(scalar_index(m1, m2)) * std::polar(1.0, 2.0 * pi * m2 * static_cast<double>(j) / grid_n);
                partial(m1 + B, j) = acc * norm;
            }
        Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(grid_n, grid_n);
        for (int i = 0; i < grid_n; ++i)
            for (int m1 = -B; m1 <= B; ++m1) {
                const cplx ph = std::polar(1.0, 2.0 * pi * m1 * static_cast<double>(i) / grid_n);
                for (int j = 0; j < grid_n; ++j) out(i, j) += partial(m1 + B, j) * ph;
            }
        return out;
    }

    // -- theta / form sector -------------------------------------------------

    cplx theta_at(cplx w) const {
        const double pi = 3.14159265358979323846;
        cplx acc{};
        for (int m = -theta_trunc; m <= theta_trunc; ++m)
            acc += std::exp(cplx(0.0, pi) * tau * static_cast<double>(m) * static_cast<double>(m) +
                            cplx(0.0, 2.0 * pi) * static_cast<double>(m) * w);
        return acc;
    }

    /// f_kappa = D^kappa theta at an arbitrary point (used by the
    /// finite-difference validation; grid values are cached in `landau`).
    cplx landau_at(int kappa, cplx w) const {
        const double pi = 3.14159265358979323846;
        const double y = w.imag();
        cplx acc{};
        for (int m = -theta_trunc; m <= theta_trunc; ++m) {
            const auto& poly = ladder[m + theta_trunc][kappa];
            cplx p{};
            for (int d = static_cast<int>(poly.size()) - 1; d >= 0; --d) p = p * y + poly[d];
            acc += p * std::exp(cplx(0.0, pi) * tau * static_cast<double>(m) * static_cast<double>(m) +
                                cplx(0.0, 2.0 * pi) * static_cast<double>(m) * w);
        }
        return acc;
    }

    double landau_eigenvalue(int kappa) const { return kappa + 1.0; }

    cplx form_inner(const Eigen::MatrixXcd& f, const Eigen::MatrixXcd& g) const {
        cplx acc{};
        for (int j = 0; j < grid_n; ++j) {
            const double wj = weight(j) * section_cell();
            for (int i = 0; i < grid_n; ++i) acc += f(i, j) * std::conj(g(i, j)) * wj;
        }
        return acc;
    }
    double form_norm_sq(const Eigen::MatrixXcd& f) const { return form_inner(f, f).real(); }

    struct FormProjection {
        Eigen::VectorXcd coeffs;
        double residual_norm = 0.0;
        double input_norm = 0.0;
    };

    FormProjection form_project(const Eigen::MatrixXcd& f) const {
        if (f.rows() != grid_n || f.cols() != grid_n) throw ShapeMismatch("form project: field does not match grid");
        FormProjection out;
        Eigen::VectorXcd rhs(landau_count);
        for (int k = 0; k < landau_count; ++k) rhs(k) = form_inner(f, landau[k]);
        out.coeffs = landau_gram.ldlt().solve(rhs);
        Eigen::MatrixXcd rec = Eigen::MatrixXcd::Zero(grid_n, grid_n);
        for (int k = 0; k < landau_count; ++k) rec += out.coeffs(k) * landau[k];
        out.input_norm = std::sqrt(std::max(0.0, form_norm_sq(f)));
        out.residual_norm = std::sqrt(std::max(0.0, form_norm_sq(f - rec)));
        return out;
    }
};

namespace detail {

inline DiffConfig jets_only() {
    DiffConfig c;
    c.mode = DiffMode::NestedDual;
    return c;
}

/// Finite-difference residual of the scalar Laplacian on one character.
inline double torus_scalar_residual(const TorusBasis& basis, int m1, int m2) {
    const double pi = 3.14159265358979323846;
    const double bb = basis.b(), re = basis.tau.real();
    const auto chi = [&](cplx w) {
        const double s2 = w.imag() / bb;
        const double s1 = w.real() - re * s2;
        return std::polar(1.0, 2.0 * pi * (m1 * s1 + m2 * s2));
    };
    const double lambda = basis.scalar_eigenvalue(m1, m2);
    double worst = 0.0;
    for (const auto& s : {std::pair{0.23, 0.41}, {0.67, 0.12}, {0.05, 0.83}}) {
        const cplx w0 = cplx(s.first, 0.0) + basis.tau * s.second;
        const double h = 1e-3;
        cplx lap{};
        for (const cplx dir : {cplx(1.0, 0.0), cplx(0.0, 1.0)})
            lap += (-chi(w0 - 2.0 * h * dir) + 16.0 * chi(w0 - h * dir) - 30.0 * chi(w0) + 16.0 * chi(w0 + h * dir) -
                    chi(w0 + 2.0 * h * dir)) /
                   (12.0 * h * h);
        const cplx box = -(bb / pi) * lap / 4.0;
        worst = std::max(worst, std::abs(box - lambda * chi(w0)));
    }
    return worst / (1.0 + lambda);
}

/// Finite-difference residual of box' on one ladder level: box'(f dwbar) =
/// -(b/pi)(d_wbar (d_w - phi_w) f) dwbar, everything from point values of f.
inline double torus_landau_residual(const TorusBasis& basis, int kappa) {
    const double pi = 3.14159265358979323846;
    const double bb = basis.b();
    const auto f = [&](cplx w) { return basis.landau_at(kappa, w); };
    const double lambda = basis.landau_eigenvalue(kappa);
    double worst = 0.0, fmax = 0.0;
    for (const auto& s : {std::pair{0.21, 0.37}, {0.73, 0.11}, {0.42, 0.64}, {0.09, 0.86}}) {
        const cplx w0 = cplx(s.first, 0.0) + basis.tau * s.second;
        const double h = 1e-3;
        cplx lap{}, fx{}, fy{};
        lap += (-f(w0 - 2.0 * h) + 16.0 * f(w0 - h) - 30.0 * f(w0) + 16.0 * f(w0 + h) - f(w0 + 2.0 * h)) /
               (12.0 * h * h);
        const cplx ih(0.0, 1.0);
        lap += (-f(w0 - 2.0 * h * ih) + 16.0 * f(w0 - h * ih) - 30.0 * f(w0) + 16.0 * f(w0 + h * ih) -
                f(w0 + 2.0 * h * ih)) /
               (12.0 * h * h);
        fx = (f(w0 - 2.0 * h) - 8.0 * f(w0 - h) + 8.0 * f(w0 + h) - f(w0 + 2.0 * h)) / (12.0 * h);
        fy = (f(w0 - 2.0 * h * ih) - 8.0 * f(w0 - h * ih) + 8.0 * f(w0 + h * ih) - f(w0 + 2.0 * h * ih)) / (12.0 * h);
        const cplx dbar_f = 0.5 * (fx + ih * fy);
        const cplx phi_w = cplx(0.0, -2.0 * pi) * w0.imag() / bb;
        const double g = pi / bb;
        const cplx box = -(1.0 / g) * (0.25 * lap - g * f(w0) - phi_w * dbar_f);
        worst = std::max(worst, std::abs(box - lambda * f(w0)));
        fmax = std::max(fmax, std::abs(f(w0)));
    }
    return worst / ((1.0 + lambda) * std::max(fmax, 1e-12));
}

}  // namespace detail

inline TorusBasis build_torus_basis(cplx tau, int mode_box = 32, int grid_n = 128, int theta_trunc = 12,
                                    int landau_count = 12) {
    const double pi = 3.14159265358979323846;
    if (!(tau.imag() > 0.0)) throw DomainError("torus basis: Im tau must be positive");
    if (mode_box < 2) throw BadTruncation("torus basis: mode box must be >= 2");
    if (theta_trunc < 4) throw BadTruncation("torus basis: theta truncation must be >= 4");
    if (landau_count < 2 || landau_count > 40) throw BadTruncation("torus basis: level count out of range");
    if (grid_n < 2 * mode_box + 2 || grid_n < 4 * theta_trunc)
        throw BadTruncation("torus basis: grid cannot resolve the requested truncations");

    TorusBasis b;
    b.tau = tau;
    b.mode_box = mode_box;
    b.grid_n = grid_n;
    b.theta_trunc = theta_trunc;
    b.landau_count = landau_count;

    // Ladder polynomials: D(p(y) e^{2 pi i m w}) = (p'/(2i) + 2 pi i (m + y /
    // Im tau) p) e^{2 pi i m w}.
    b.ladder.resize(2 * theta_trunc + 1);
    for (int m = -theta_trunc; m <= theta_trunc; ++m) {
        auto& levels = b.ladder[m + theta_trunc];
        levels.resize(landau_count);
        levels[0] = {cplx(1.0, 0.0)};
        for (int k = 0; k + 1 < landau_count; ++k) {
            const auto& p = levels[k];
            std::vector<cplx> next(p.size() + 1, cplx{});
            for (int d = 0; d < static_cast<int>(p.size()); ++d) {
                if (d + 1 < static_cast<int>(p.size()))
                    next[d] += (static_cast<double>(d + 1) * p[d + 1]) / cplx(0.0, 2.0);
                next[d] += cplx(0.0, 2.0 * pi) * static_cast<double>(m) * p[d];
                next[d + 1] += cplx(0.0, 2.0 * pi) / b.b() * p[d];
            }
            levels[k + 1] = std::move(next);
        }
    }

    b.landau.resize(landau_count);
    for (int k = 0; k < landau_count; ++k) {
        b.landau[k].resize(grid_n, grid_n);
        for (int i = 0; i < grid_n; ++i)
            for (int j = 0; j < grid_n; ++j) b.landau[k](i, j) = b.landau_at(k, b.grid_point(i, j));
    }
    b.landau_gram.resize(landau_count, landau_count);
    for (int k = 0; k < landau_count; ++k)
        for (int l = 0; l < landau_count; ++l) b.landau_gram(k, l) = b.form_inner(b.landau[k], b.landau[l]);

    for (const auto& mode : {std::pair{1, 0}, {0, 1}, {2, 3}}) {
        const double res = detail::torus_scalar_residual(b, mode.first, mode.second);
        if (!(res <= 1e-6))
            throw SpectrumValidationFailed("torus basis: character (" + std::to_string(mode.first) + ", " +
                                           std::to_string(mode.second) + ") violates its eigenvalue, residual " +
                                           std::to_string(res));
    }
    for (int k = 0; k < std::min(4, landau_count); ++k) {
        const double res = detail::torus_landau_residual(b, k);
        if (!(res <= 1e-6))
            throw SpectrumValidationFailed("torus basis: ladder level " + std::to_string(k) +
                                           " violates its eigenvalue, residual " + std::to_string(res));
    }
    return b;
}

inline Eigen::MatrixXcd resolvent_apply_scalar(const TorusBasis& basis, const Eigen::MatrixXcd& f) {
    Eigen::VectorXcd coeffs = basis.scalar_project_coeffs(f);
    const Eigen::MatrixXcd rec = basis.scalar_synthesize(coeffs);
    const double residual = std::sqrt(std::max(0.0, basis.scalar_norm_sq(f - rec)));
    const double input = std::sqrt(basis.scalar_norm_sq(f));
    if (residual > 1e-6 * std::max(input, 1e-300))
        throw ProjectionResidualTooLarge("torus resolvent: input is not band-limited, residual " +
                                         std::to_string(residual));
    for (int m1 = -basis.mode_box; m1 <= basis.mode_box; ++m1)
        for (int m2 = -basis.mode_box; m2 <= basis.mode_box; ++m2)
            coeffs(basis.scalar_index(m1, m2)) /= 1.0 + basis.scalar_eigenvalue(m1, m2);
    return basis.scalar_synthesize(coeffs);
}

// ---------------------------------------------------------------------------
// The direct image line: Gram of the theta section and its curvature in tau.

struct TorusSections {
    double h = 0.0;                 ///< ||theta||^2 under the section measure
    double refinement_delta = 0.0;  ///< |h(2N) - h(N)| relative to h
};

namespace detail {

inline double theta_gram_on_grid(cplx tau, int theta_trunc, int n) {
    const double pi = 3.14159265358979323846;
    const double bb = tau.imag();
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
        const double s2 = static_cast<double>(j) / n;
        const double weight = std::exp(-2.0 * pi * bb * s2 * s2);
        for (int i = 0; i < n; ++i) {
            const cplx w = cplx(static_cast<double>(i) / n, 0.0) + tau * s2;
            cplx th{};
            for (int m = -theta_trunc; m <= theta_trunc; ++m)
                th += std::exp(cplx(0.0, pi) * tau * static_cast<double>(m) * static_cast<double>(m) +
                               cplx(0.0, 2.0 * pi) * static_cast<double>(m) * w);
            acc += std::norm(th) * weight;
        }
    }
    return acc * 2.0 * bb / (static_cast<double>(n) * n);
}

}  // namespace detail

inline TorusSections build_torus_sections(const TorusBasis& basis) {
    TorusSections s;
    s.h = detail::theta_gram_on_grid(basis.tau, basis.theta_trunc, basis.grid_n);
    const double refined = detail::theta_gram_on_grid(basis.tau, basis.theta_trunc, 2 * basis.grid_n);
    s.refinement_delta = std::abs(refined - s.h) / std::max(s.h, 1e-300);
    if (s.refinement_delta > 1e-5)
        throw QuadratureNotConverged("torus sections: Gram moved by relative " +
                                     std::to_string(s.refinement_delta) + " under grid doubling");
    if (!(s.h > 0.0)) throw MetricNotPositive("torus sections: Gram is not positive");
    return s;
}

struct DirectImageCurvature {
    double h = 0.0;                ///< Gram at the center tau
    double theta_curvature = 0.0;  ///< -d_tau d_taubar log h by stencils
    double refinement_delta = 0.0;
};

/// Gram of the theta section by quadrature and its curvature by fourth-order
/// stencils in Re tau and Im tau: -dd log h = -(1/4)(Laplacian of log h).
inline DirectImageCurvature direct_image_gram(cplx tau, int theta_trunc = 12, int grid_n = 128,
                                              double step = 0.01) {
    if (!(tau.imag() > 4.0 * step)) throw DomainError("direct image: Im tau too small for the stencil");
    DirectImageCurvature out;
    out.h = detail::theta_gram_on_grid(tau, theta_trunc, grid_n);
    const double refined = detail::theta_gram_on_grid(tau, theta_trunc, 2 * grid_n);
    out.refinement_delta = std::abs(refined - out.h) / std::max(out.h, 1e-300);
    if (out.refinement_delta > 1e-5)
        throw QuadratureNotConverged("direct image: Gram moved by relative " +
                                     std::to_string(out.refinement_delta) + " under grid doubling");
    const auto logh = [&](cplx t) { return std::log(detail::theta_gram_on_grid(t, theta_trunc, grid_n)); };
    static constexpr double w2[5] = {-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0};
    double lap = 0.0;
    for (int t = -2; t <= 2; ++t) lap += w2[t + 2] * logh(tau + cplx(step * t, 0.0)) / (step * step);
    for (int t = -2; t <= 2; ++t) lap += w2[t + 2] * logh(tau + cplx(0.0, step * t)) / (step * step);
    out.theta_curvature = -lap / 4.0;
    return out;
}

// ---------------------------------------------------------------------------
// Curvature of the direct image via the fiber formula, the subspace spectral
// radius sigma, and the positivity-bound assembly.

/// Max Rayleigh quotient of box' over the span of the given form fields,
/// via the projected generalized eigenproblem in the ladder basis.
inline double sigma_estimate(const TorusBasis& basis, const std::vector<Eigen::MatrixXcd>& forms) {
    if (forms.empty()) throw EmptySubspace("sigma: no spanning forms given");
    std::vector<Eigen::VectorXcd> cols;
    for (const auto& f : forms) {
        const TorusBasis::FormProjection p = basis.form_project(f);
        if (p.input_norm <= 1e-12) continue;
        if (p.residual_norm > 1e-6 * p.input_norm)
            throw ProjectionResidualTooLarge("sigma: a spanning form is not in the resolved ladder span");
        cols.push_back(p.coeffs);
    }
    if (cols.empty()) throw EmptySubspace("sigma: the spanning forms are all zero");
    const int S = static_cast<int>(cols.size()), L = basis.landau_count;
    Eigen::MatrixXcd C(L, S);
    for (int s = 0; s < S; ++s) C.col(s) = cols[s];
    Eigen::VectorXcd lam(L);
    for (int k = 0; k < L; ++k) lam(k) = basis.landau_eigenvalue(k);
    Eigen::MatrixXcd A = C.transpose() * (lam.asDiagonal() * basis.landau_gram) * C.conjugate();
    Eigen::MatrixXcd B = C.transpose() * basis.landau_gram * C.conjugate();
    A = 0.5 * (A + A.adjoint().eval());
    B = 0.5 * (B + B.adjoint().eval());
    // Reduce to the numerically independent part of the span before solving.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> bs(B);
    const double bmax = bs.eigenvalues().maxCoeff();
    if (!(bmax > 0.0)) throw EmptySubspace("sigma: the spanning forms are all zero");
    std::vector<int> keep;
    for (int s = 0; s < S; ++s)
        if (bs.eigenvalues()(s) > 1e-10 * bmax) keep.push_back(s);
    Eigen::MatrixXcd V(S, static_cast<int>(keep.size()));
    for (std::size_t t = 0; t < keep.size(); ++t)
        V.col(static_cast<int>(t)) = bs.eigenvectors().col(keep[t]) / std::sqrt(bs.eigenvalues()(keep[t]));
    const Eigen::MatrixXcd Ared = V.adjoint() * A * V;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> as(0.5 * (Ared + Ared.adjoint().eval()));
    return as.eigenvalues().maxCoeff();
}

/// Curvature pairing of the direct image: the fiber integral of c(phi)
/// against ||u||^2 plus the resolvent term over the contracted forms,
///   <Theta u, u> = int c(phi)_{alpha betabar} |u|^2 e^{-phi}
///                  + <(1 + box')^{-1} i_{mu_alpha} u, i_{mu_beta} u>.
inline cplx berndtsson_curvature(const FiberFamily& fam, const TorusBasis& basis, const TorusSections& sections,
                                 int alpha, int beta, const Eigen::VectorXcd& u,
                                 std::span<const cplx> base_point, int threads = 0) {
    if (alpha < 0 || alpha >= fam.base_dim || beta < 0 || beta >= fam.base_dim)
        throw ShapeMismatch("curvature pairing: base direction out of range");
    if (u.size() != 1) throw ShapeMismatch("curvature pairing: the torus section space is one-dimensional");
    if (static_cast<int>(base_point.size()) != fam.base_dim)
        throw ShapeMismatch("curvature pairing: base point dimension mismatch");
    (void)sections;
    if (u.cwiseAbs().maxCoeff() == 0.0) return cplx{};

    const int n = basis.grid_n;
    const int total = n * n;
    std::vector<cplx> c_ab(total), mu_a(total), mu_b(total);
    const std::vector<cplx> zp(base_point.begin(), base_point.end());
    parallel_for(static_cast<std::size_t>(total), resolve_threads(threads), [&](std::size_t idx) {
        const int i = static_cast<int>(idx) / n, j = static_cast<int>(idx) % n;
        const cplx w = basis.grid_point(i, j);
        const DiffConfig cfg = detail::jets_only();
        const GeodesicCurvature gc = geodesic_curvature(fam, zp, w, cfg);
        c_ab[idx] = gc.c(alpha, beta);
        const KodairaSpencerTensor ks = kodaira_spencer(fam, zp, w, cfg);
        mu_a[idx] = ks.mu(alpha);
        mu_b[idx] = ks.mu(beta);
    });

    cplx first{};
    Eigen::MatrixXcd ia(n, n), ib(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const int idx = i * n + j;
            const cplx uval = u(0) * basis.theta_at(basis.grid_point(i, j));
            first += c_ab[idx] * std::norm(uval) * basis.weight(j) * basis.section_cell();
            ia(i, j) = uval * mu_a[idx];
            ib(i, j) = uval * mu_b[idx];
        }

    const TorusBasis::FormProjection pa = basis.form_project(ia);
    const TorusBasis::FormProjection pb = basis.form_project(ib);
    for (const auto* p : {&pa, &pb})
        if (p->residual_norm > 1e-6 * std::max(p->input_norm, 1e-300))
            throw ProjectionResidualTooLarge("curvature pairing: contracted form leaves the ladder span");

    cplx second{};
    for (int k = 0; k < basis.landau_count; ++k)
        for (int l = 0; l < basis.landau_count; ++l)
            second += pa.coeffs(k) / (1.0 + basis.landau_eigenvalue(k)) * std::conj(pb.coeffs(l)) *
                      basis.landau_gram(k, l);
    return first + second;
}

struct NakanoReport {
    double q_value = 0.0;        ///< curvature pairing Q(A, A)
    double iota_norm_sq = 0.0;   ///< ||i_mu A||^2 by quadrature
    double sigma = 0.0;          ///< spectral radius of box' on the contracted span
    double bound_coefficient = 0.0;  ///< 1/(1+2 n_fiber) + 1/(1+sigma)
    double margin = 0.0;             ///< q_value - bound_coefficient * iota_norm_sq
    bool asserted = false;  ///< torus model: positivity hypotheses unmet, so report-only
    bool trivial = false;   ///< A = 0
};

/// Assembles the positivity-bound ledger Q(A,A) vs (1/(1+2n) +
/// 1/(1+sigma)) ||iota(A)||^2 for A = a (d/dz^alpha) tensor theta on the
/// torus model. The flat fiber violates the curvature hypothesis of the
/// bound, so the margin is reported, never asserted.
inline NakanoReport nakano_bound_check(const FiberFamily& fam, const TorusBasis& basis,
                                       const TorusSections& sections, const Eigen::VectorXcd& A,
                                       std::span<const cplx> base_point, int threads = 0) {
    if (A.size() != 1) throw ShapeMismatch("bound check: expected one coefficient on TM tensor E");
    NakanoReport rep;
    if (A.cwiseAbs().maxCoeff() == 0.0) {
        rep.trivial = true;
        return rep;
    }
    rep.q_value = berndtsson_curvature(fam, basis, sections, 0, 0, A, base_point, threads).real();

    const int n = basis.grid_n;
    Eigen::MatrixXcd iota(n, n);
    const std::vector<cplx> zp(base_point.begin(), base_point.end());
    std::vector<cplx> mu(static_cast<std::size_t>(n) * n);
    parallel_for(static_cast<std::size_t>(n) * n, resolve_threads(threads), [&](std::size_t idx) {
        const int i = static_cast<int>(idx) / n, j = static_cast<int>(idx) % n;
        mu[idx] = kodaira_spencer(fam, zp, basis.grid_point(i, j), detail::jets_only()).mu(0);
    });
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            iota(i, j) = A(0) * basis.theta_at(basis.grid_point(i, j)) * mu[static_cast<std::size_t>(i) * n + j];
    rep.iota_norm_sq = basis.form_norm_sq(iota);

    if (rep.iota_norm_sq > 1e-14 * std::max(1.0, sections.h)) rep.sigma = sigma_estimate(basis, {iota});
    rep.bound_coefficient = 1.0 / 3.0 + 1.0 / (1.0 + rep.sigma);
    rep.margin = rep.q_value - rep.bound_coefficient * rep.iota_norm_sq;
    return rep;
}

}  // namespace bundlecurv
