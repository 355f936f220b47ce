#ifndef PSEUDOHERM_ERRORS_HPP
#define PSEUDOHERM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pseudoherm {

// Base for all library errors so callers can catch the whole family.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid construction parameters (cutoff too small, bad keep, ...).
struct InvalidTruncationError : Error {
  using Error::Error;
};

// Two operators live in different bases / sizes.
struct BasisMismatchError : Error {
  using Error::Error;
};

// Eigendecomposition cannot be biorthogonally normalized within tolerance.
struct NearDefectiveError : Error {
  double condition;  // conditioning diagnostic of the eigenvector matrix
  NearDefectiveError(const std::string& msg, double cond)
      : Error(msg), condition(cond) {}
};

// Spectrum fails the near-integer gate of the (-1)^M evaluation.
struct SpectrumNotIntegerError : Error {
  double worst_offender;  // |lambda - shift - round(Re lambda - shift)|
  SpectrumNotIntegerError(const std::string& msg, double worst)
      : Error(msg), worst_offender(worst) {}
};

// Hermitized interior block of the metric has a nonpositive eigenvalue.
struct MetricNotPositiveError : Error {
  double min_eig;
  MetricNotPositiveError(const std::string& msg, double eig)
      : Error(msg), min_eig(eig) {}
};

// Ground-state candidate is not annihilated well enough (cutoff too small).
struct AnnihilationResidualError : Error {
  double residual;
  AnnihilationResidualError(const std::string& msg, double r)
      : Error(msg), residual(r) {}
};

// Matrix exponential overflowed / produced non-finite entries.
struct ScalingFailureError : Error {
  using Error::Error;
};

// Hermite degree beyond the stable recurrence range.
struct DegreeLimitError : Error {
  using Error::Error;
};

// Quadrature result not converged under node doubling, or scheme invalid.
struct InsufficientQuadratureError : Error {
  using Error::Error;
};

// Noncommutativity parameters outside the first-order regime guard.
struct NCGuardError : Error {
  using Error::Error;
};

// Operation precondition violated at the API level (counts, ranges).
struct PreconditionError : Error {
  using Error::Error;
};

}  // namespace pseudoherm

#endif  // PSEUDOHERM_ERRORS_HPP
