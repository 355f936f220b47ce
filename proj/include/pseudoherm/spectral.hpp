#ifndef PSEUDOHERM_SPECTRAL_HPP
#define PSEUDOHERM_SPECTRAL_HPP

#include <complex>

#define LAPACK_COMPLEX_CUSTOM
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "errors.hpp"
#include "operators.hpp"

namespace pseudoherm {

// Nearest integer with halves rounded up. Never use round-half-to-even here:
// shifted oscillator spectra sit exactly on half-integers before shifting,
// and banker's rounding would misclassify alternate levels.
inline long round_half_up(double x) { return static_cast<long>(std::floor(x + 0.5)); }

// Biorthogonal eigendecomposition of a general (non-normal) matrix.
// left_vectors rows pair with right_vectors columns: left*right = I.
struct SpectralDecomposition {
  Vector eigenvalues;     // ascending by (Re, Im)
  Matrix right_vectors;   // columns
  Matrix left_vectors;    // rows, normalized so left*right = I
  double condition = 0.0; // 2-norm condition estimate of right_vectors
};

namespace detail {

// Power-iteration estimate of the largest singular value.
inline double sigma_max_estimate(const Matrix& r, int iters = 60) {
  const Eigen::Index n = r.rows();
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    v(i) = Complex(1.0 + 0.01 * std::sin(1.0 + double(i)),
                   0.01 * std::cos(2.0 + 2.0 * double(i)));
  v.normalize();
  double s2 = 0.0;
  for (int it = 0; it < iters; ++it) {
    Vector w = r.adjoint() * (r * v);
    s2 = w.norm();
    if (s2 == 0.0) return 0.0;
    v = w / s2;
  }
  return std::sqrt(s2);
}

// Smallest singular value via power iteration on (R^H R)^{-1} using the
// LU solves; returns 0 when the solves degenerate.
inline double sigma_min_estimate(const Eigen::PartialPivLU<Matrix>& lu,
                                 Eigen::Index n, int iters = 60) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    v(i) = Complex(1.0 + 0.01 * std::cos(0.5 + double(i)),
                   0.01 * std::sin(1.0 + 3.0 * double(i)));
  v.normalize();
  double s2 = 0.0;
  for (int it = 0; it < iters; ++it) {
    Vector t = lu.adjoint().solve(v);
    Vector w = lu.solve(t);
    if (!w.allFinite()) return 0.0;
    s2 = w.norm();
    if (s2 == 0.0) return 0.0;
    v = w / s2;
  }
  return 1.0 / std::sqrt(s2);
}

}  // namespace detail

// Full nonsymmetric eigensolve: right vectors from LAPACK, eigenvalues sorted
// ascending by (Re, Im), clustered eigenvector groups re-orthonormalized, and
// left vectors obtained as the iteratively refined inverse of the right
// basis. Throws NearDefectiveError when biorthogonal normalization cannot
// reach working accuracy (ill-conditioned or defective input).
inline SpectralDecomposition eig_general(const ComplexOperator& m) {
  const int n = m.dim();
  Matrix a = m.entries;
  Vector w(n);
  Matrix vr(n, n);
  lapack_int info =
      LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'V', n, a.data(), n, w.data(),
                    nullptr, 1, vr.data(), n);
  if (info != 0)
    throw NearDefectiveError("eigenvalue iteration did not converge",
                             std::numeric_limits<double>::infinity());

  std::vector<int> idx(static_cast<size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int i, int j) {
    if (w(i).real() != w(j).real()) return w(i).real() < w(j).real();
    return w(i).imag() < w(j).imag();
  });
  SpectralDecomposition out;
  out.eigenvalues.resize(n);
  out.right_vectors.resize(n, n);
  for (int j = 0; j < n; ++j) {
    out.eigenvalues(j) = w(idx[static_cast<size_t>(j)]);
    out.right_vectors.col(j) = vr.col(idx[static_cast<size_t>(j)]);
  }

  // The raw eigenvector columns are kept as returned: re-mixing a nearly
  // degenerate cluster (e.g. by QR) is only span-preserving for exactly
  // equal eigenvalues, and inside an ill-conditioned cluster the residual
  // spread gets amplified by the cluster's own conditioning, wrecking the
  // reconstruction identity. A defective basis instead fails the
  // biorthogonality gate below, because refinement cannot converge on a
  // numerically singular column set.
  Eigen::PartialPivLU<Matrix> lu(out.right_vectors);
  Matrix left = lu.inverse();

  const double sigma_max = detail::sigma_max_estimate(out.right_vectors);
  const double sigma_min = detail::sigma_min_estimate(lu, n);
  out.condition = sigma_min > 0.0
                      ? sigma_max / sigma_min
                      : std::numeric_limits<double>::infinity();
  if (!left.allFinite())
    throw NearDefectiveError("right eigenvector basis is numerically singular",
                             out.condition);

  // The plain LU inverse carries forward error ~eps*cond(R), which lands
  // directly in left*right - I. Iterative refinement with the residual
  // accumulated in extended precision recovers the componentwise-accurate
  // inverse, which keeps the reconstruction identity intact at the same
  // time. (A working-precision Newton step would not: it cancels the
  // residual it can see while drifting in the near-null directions of R.)
  // Row i of `left` solves l_i * R = e_i, so rows refine independently:
  // the cheap stage treats only rows whose working-precision residual is
  // near the biorthogonality gate (k*n^2 instead of n^3), and a full-row
  // stage runs only if the reconstruction identity still suffers from the
  // mixture of refined rows with raw LU rows, whose global backward-error
  // cancellation the partial update destroys.
  using LdComplex = std::complex<long double>;
  using LdMatrix = Eigen::Matrix<LdComplex, Eigen::Dynamic, Eigen::Dynamic>;
  constexpr double kOrthoGate = 1e-8;
  LdMatrix r_ld;  // filled on first refinement pass
  auto extended_pass = [&](const std::vector<int>& rows) {
    if (r_ld.size() == 0) r_ld = out.right_vectors.cast<LdComplex>();
    const int k = static_cast<int>(rows.size());
    LdMatrix l_flag(k, n);
    for (int i = 0; i < k; ++i)
      l_flag.row(i) = left.row(rows[size_t(i)]).cast<LdComplex>();
    LdMatrix g_ld = -(l_flag * r_ld);
    for (int i = 0; i < k; ++i) g_ld(i, rows[size_t(i)]) += LdComplex(1.0);
    Matrix g_exact = g_ld.unaryExpr([](const LdComplex& v) {
      return Complex(double(v.real()), double(v.imag()));
    });
    // correction rows D solve D * R = g_exact, i.e. R^T D^T = g_exact^T
    const Matrix delta_t = lu.transpose().solve(g_exact.transpose().eval());
    if (!delta_t.allFinite()) return false;
    for (int i = 0; i < k; ++i)
      left.row(rows[size_t(i)]) += delta_t.col(i).transpose();
    return true;
  };
  auto ortho_of = [&]() {
    if (!left.allFinite()) return std::numeric_limits<double>::infinity();
    return max_abs(
        Matrix(left * out.right_vectors - Matrix::Identity(n, n)));
  };
  double ortho = std::numeric_limits<double>::infinity();
  bool partial = false;
  for (int pass = 0; pass < 4; ++pass) {
    const Matrix g = Matrix::Identity(n, n) - left * out.right_vectors;
    ortho = left.allFinite() ? max_abs(g)
                             : std::numeric_limits<double>::infinity();
    if (ortho < kOrthoGate / 2.0 || pass == 3 || !std::isfinite(ortho)) break;
    std::vector<int> rows;
    for (int i = 0; i < n; ++i)
      if (g.row(i).cwiseAbs().maxCoeff() > kOrthoGate / 4.0) rows.push_back(i);
    if (rows.empty()) break;
    partial = partial || static_cast<int>(rows.size()) < n;
    if (!extended_pass(rows)) break;
  }
  if (!(ortho < kOrthoGate))
    throw NearDefectiveError(
        "biorthogonal normalization failed (left*right deviates from identity by " +
            std::to_string(ortho) + ")",
        out.condition);
  auto recon_of = [&]() {
    return max_abs(Matrix(out.right_vectors * out.eigenvalues.asDiagonal() *
                              left -
                          m.entries));
  };
  const double recon_gate = 1e-6 * std::max(max_abs(m.entries), 1e-300);
  double recon = recon_of();
  if (!(recon <= recon_gate) && partial) {
    std::vector<int> all(static_cast<size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    for (int pass = 0; pass < 2 && !(recon <= recon_gate); ++pass) {
      if (!extended_pass(all)) break;
      recon = recon_of();
    }
    ortho = ortho_of();
    if (!(ortho < kOrthoGate))
      throw NearDefectiveError(
          "biorthogonal normalization failed (left*right deviates from identity by " +
              std::to_string(ortho) + ")",
          out.condition);
  }
  if (!(recon <= recon_gate))
    throw NearDefectiveError(
        "spectral reconstruction error " + std::to_string(recon) +
            " reveals a defective invariant subspace",
        out.condition);

  out.left_vectors = std::move(left);
  return out;
}

namespace detail {

inline thread_local double g_power_shift = 0.0;

inline lapack_logical select_odd_level(const lapack_complex_double* w) {
  const long k = round_half_up(w->real() - g_power_shift);
  return (k % 2 != 0) ? 1 : 0;
}

// Shared Schur-based core evaluating (-1)^(M - shift*I). The integer-spectrum
// gate normally covers every eigenvalue; a nonnegative gate_count restricts it
// to that many lowest-real-part eigenvalues so callers working at an enlarged
// cutoff can tolerate the inaccurate top of a truncated spectrum (those levels
// still get classified by parity, they are just not required to be integers).
inline Matrix power_of_minus_one_core(const Matrix& m, double shift,
                                      long gate_count) {
  const lapack_int n = static_cast<lapack_int>(m.rows());
  Matrix t = m;
  Matrix q(n, n);
  Vector w(n);
  lapack_int sdim = 0;
  g_power_shift = shift;
  lapack_int info =
      LAPACKE_zgees(LAPACK_COL_MAJOR, 'V', 'S', &select_odd_level, n, t.data(),
                    n, &sdim, w.data(), q.data(), n);
  if (info < 0 || (info > 0 && info <= n))
    throw NearDefectiveError("Schur factorization did not converge",
                             std::numeric_limits<double>::infinity());
  if (info == n + 1)
    throw NearDefectiveError(
        "odd/even eigenvalue groups are too ill-conditioned to reorder",
        std::numeric_limits<double>::infinity());
  // info == n+2 only flags roundoff-level movement of reordered eigenvalues.

  std::vector<Complex> mu(static_cast<size_t>(n));
  for (lapack_int i = 0; i < n; ++i) mu[static_cast<size_t>(i)] = w(i) - shift;
  std::sort(mu.begin(), mu.end(), [](Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  const size_t checked = (gate_count >= 0 && gate_count < n)
                             ? static_cast<size_t>(gate_count)
                             : static_cast<size_t>(n);
  double worst = 0.0;
  Complex worst_mu = 0.0;
  for (size_t i = 0; i < checked; ++i) {
    const double nearest = double(round_half_up(mu[i].real()));
    const double dist =
        std::max(std::abs(mu[i] - Complex(nearest, 0.0)), std::abs(mu[i].imag()));
    if (dist > worst) {
      worst = dist;
      worst_mu = mu[i];
    }
  }
  if (!(worst < 0.1))
    throw SpectrumNotIntegerError(
        "shifted eigenvalue " + std::to_string(worst_mu.real()) +
            (worst_mu.imag() < 0 ? " - " : " + ") +
            std::to_string(std::abs(worst_mu.imag())) +
            "i sits " + std::to_string(worst) + " away from an integer",
        worst);

  if (sdim == 0) return Matrix::Identity(n, n);
  if (sdim == n) return -Matrix::Identity(n, n);

  // Spectral projector onto the leading (odd-level) block of the ordered
  // Schur form: solve T11*Y - Y*T22 = T12, then project and reflect.
  Matrix t11 = t.topLeftCorner(sdim, sdim);
  Matrix t22 = t.bottomRightCorner(n - sdim, n - sdim);
  Matrix y = t.topRightCorner(sdim, n - sdim);
  double scale = 0.0;
  info = LAPACKE_ztrsyl(LAPACK_COL_MAJOR, 'N', 'N', -1, sdim, n - sdim,
                        t11.data(), sdim, t22.data(), n - sdim, y.data(), sdim,
                        &scale);
  if (info < 0 || scale == 0.0)
    throw NearDefectiveError("Sylvester solve for the parity projector failed",
                             std::numeric_limits<double>::infinity());
  if (info == 1)
    throw NearDefectiveError(
        "odd and even spectral blocks share eigenvalues; projector is singular",
        std::numeric_limits<double>::infinity());
  y /= scale;
  const double y_norm = max_abs(y);
  if (!(y_norm < 1e8))
    throw NearDefectiveError("parity projector coupling blew up", y_norm);

  Matrix proj = Matrix::Zero(n, n);
  proj.topLeftCorner(sdim, sdim) = Matrix::Identity(sdim, sdim);
  proj.topRightCorner(sdim, n - sdim) = y;
  Matrix v = Matrix::Identity(n, n) - 2.0 * (q * (proj * q.adjoint()));
  if (!v.allFinite())
    throw NearDefectiveError("parity operator has non-finite entries",
                             std::numeric_limits<double>::infinity());
  return v;
}

}  // namespace detail

// (-1)^(M - shift*I): +1 on even shifted levels, -1 on odd ones. Requires the
// whole spectrum of M - shift*I to sit within 0.1 of the integers (real up to
// the same tolerance); rejects otherwise, reporting the worst offender. The
// input must also be numerically diagonalizable, which is enforced up front.
inline ComplexOperator matrix_power_of_minus_one(const ComplexOperator& m,
                                                 double shift) {
  eig_general(m);  // enforce diagonalizability; result not needed
  return {detail::power_of_minus_one_core(m.entries, shift, -1), m.basis_tag,
          m.cutoff};
}

}  // namespace pseudoherm

#endif  // PSEUDOHERM_SPECTRAL_HPP
