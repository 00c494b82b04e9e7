#pragma once

#include <stdexcept>
#include <string>

namespace bundlecurv {

/// Base class for all library errors. Every failure mode has its own type so
/// callers (and tests) can react to the precise condition.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A field evaluation produced NaN/Inf (overflow, pole, ...).
class NonFiniteValue : public Error {
public:
    using Error::Error;
};

/// Dual-number and finite-difference derivative paths disagree beyond the
/// configured relative tolerance. Carries the worst offending pair.
class CrossCheckMismatch : public Error {
public:
    CrossCheckMismatch(const std::string& msg, double dual_value, double fd_value)
        : Error(msg), dual(dual_value), fd(fd_value) {}
    double dual = 0.0;
    double fd = 0.0;
};

/// Matrix expected to be Hermitian is not (beyond tolerance).
class NotHermitian : public Error {
public:
    using Error::Error;
};

/// Gram/metric matrix expected positive definite has a non-positive eigenvalue.
class MetricNotPositive : public Error {
public:
    using Error::Error;
};

/// Tensor shapes/kinds do not line up for the requested contraction.
class ShapeMismatch : public Error {
public:
    using Error::Error;
};

/// Metric condition number exceeds the hard limit; solves are meaningless.
class SingularMetric : public Error {
public:
    using Error::Error;
};

/// Expression-parser failure. Records the byte offset and what was expected.
class SyntaxError : public Error {
public:
    SyntaxError(const std::string& msg, std::size_t position, std::string expected_set)
        : Error(msg), position(position), expected(std::move(expected_set)) {}
    std::size_t position = 0;
    std::string expected;
};

/// Expression references a variable outside the declared z1..zn / v1..vr set.
class UnknownVariable : public Error {
public:
    using Error::Error;
};

/// Evaluation hit a guarded singularity: log of (near-)zero modulus or a
/// division whose denominator modulus is below 1e-12.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Schwarzian derivative requested at a point where |f'| <= 1e-10.
class CriticalPoint : public Error {
public:
    using Error::Error;
};

/// Bundle metric fails the Griffiths-negativity precondition.
class NotGriffithsNegative : public Error {
public:
    using Error::Error;
};

/// Genus-dependent bound requested for genus < 2.
class BadGenus : public Error {
public:
    using Error::Error;
};

/// Spectral truncation parameters too small to be meaningful.
class BadTruncation : public Error {
public:
    using Error::Error;
};

/// A function handed to a spectral projector is not captured by the truncated
/// basis to the required residual.
class ProjectionResidualTooLarge : public Error {
public:
    using Error::Error;
};

/// Quadrature refinement changed a result beyond the stability tolerance.
class QuadratureNotConverged : public Error {
public:
    using Error::Error;
};

/// A derived eigenbasis failed its independent residual validation.
class SpectrumValidationFailed : public Error {
public:
    using Error::Error;
};

/// Eigenvalue estimate requested on an (numerically) empty subspace.
class EmptySubspace : public Error {
public:
    using Error::Error;
};

/// Run configuration is malformed (unknown key, bad value, negative tolerance, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace bundlecurv
