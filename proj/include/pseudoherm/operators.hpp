#ifndef PSEUDOHERM_OPERATORS_HPP
#define PSEUDOHERM_OPERATORS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <string>
#include <unsupported/Eigen/MatrixFunctions>
#include <utility>

#include "errors.hpp"

namespace pseudoherm {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Fock-basis tag. TwoMode means the tensor basis |n1> (x) |n2> with the
// mode-1 index slow: flat index = n1*cutoff + n2.
enum class BasisTag { SingleMode, TwoMode };

inline const char* basis_tag_name(BasisTag t) {
  return t == BasisTag::SingleMode ? "single_mode" : "two_mode";
}

// Dense square complex matrix tagged with its basis and per-mode truncation.
// dim == cutoff for SingleMode, dim == cutoff^2 for TwoMode.
struct ComplexOperator {
  Matrix entries;
  BasisTag basis_tag = BasisTag::SingleMode;
  int cutoff = 0;  // per mode

  ComplexOperator() = default;
  ComplexOperator(Matrix m, BasisTag tag, int cutoff_per_mode)
      : entries(std::move(m)), basis_tag(tag), cutoff(cutoff_per_mode) {
    const Eigen::Index expect =
        tag == BasisTag::SingleMode
            ? cutoff_per_mode
            : Eigen::Index(cutoff_per_mode) * cutoff_per_mode;
    if (entries.rows() != entries.cols() || entries.rows() != expect)
      throw InvalidTruncationError("operator dimension does not match basis tag");
    if (!entries.allFinite())
      throw ScalingFailureError("operator has non-finite entries");
  }

  int dim() const { return static_cast<int>(entries.rows()); }
};

inline void require_same_basis(const ComplexOperator& a,
                               const ComplexOperator& b) {
  if (a.basis_tag != b.basis_tag || a.cutoff != b.cutoff)
    throw BasisMismatchError("operators live in different bases");
}

inline ComplexOperator operator+(const ComplexOperator& a,
                                 const ComplexOperator& b) {
  require_same_basis(a, b);
  return {a.entries + b.entries, a.basis_tag, a.cutoff};
}
inline ComplexOperator operator-(const ComplexOperator& a,
                                 const ComplexOperator& b) {
  require_same_basis(a, b);
  return {a.entries - b.entries, a.basis_tag, a.cutoff};
}
inline ComplexOperator operator*(const ComplexOperator& a,
                                 const ComplexOperator& b) {
  require_same_basis(a, b);
  return {a.entries * b.entries, a.basis_tag, a.cutoff};
}
inline ComplexOperator operator*(Complex s, const ComplexOperator& a) {
  return {s * a.entries, a.basis_tag, a.cutoff};
}
inline ComplexOperator operator*(double s, const ComplexOperator& a) {
  return {s * a.entries, a.basis_tag, a.cutoff};
}

inline ComplexOperator conj_transpose(const ComplexOperator& a) {
  return {a.entries.adjoint(), a.basis_tag, a.cutoff};
}

inline ComplexOperator identity_like(BasisTag tag, int cutoff) {
  const Eigen::Index d =
      tag == BasisTag::SingleMode ? cutoff : Eigen::Index(cutoff) * cutoff;
  return {Matrix::Identity(d, d), tag, cutoff};
}

// Truncated ladder matrix: sqrt(n) at row n-1, column n (0-indexed).
inline ComplexOperator annihilation_matrix(int cutoff) {
  if (cutoff < 2)
    throw InvalidTruncationError("annihilation_matrix requires cutoff >= 2");
  Matrix b = Matrix::Zero(cutoff, cutoff);
  for (int n = 1; n < cutoff; ++n) b(n - 1, n) = std::sqrt(double(n));
  return {std::move(b), BasisTag::SingleMode, cutoff};
}

// Hermitian x = (b + b^dag)/sqrt(2), p = i(b^dag - b)/sqrt(2).
inline std::pair<ComplexOperator, ComplexOperator> position_momentum(
    int cutoff) {
  ComplexOperator b = annihilation_matrix(cutoff);
  const Complex i(0.0, 1.0);
  Matrix x = (b.entries + b.entries.adjoint()) / std::sqrt(2.0);
  Matrix p = i * (b.entries.adjoint() - b.entries) / std::sqrt(2.0);
  return {ComplexOperator{std::move(x), BasisTag::SingleMode, cutoff},
          ComplexOperator{std::move(p), BasisTag::SingleMode, cutoff}};
}

// Tensor product with the mode-1 index slow; result is TwoMode.
inline ComplexOperator kron(const ComplexOperator& a,
                            const ComplexOperator& b) {
  if (a.basis_tag != BasisTag::SingleMode || b.basis_tag != BasisTag::SingleMode)
    throw BasisMismatchError("kron expects two single-mode operators");
  if (a.cutoff != b.cutoff)
    throw BasisMismatchError("kron expects equal cutoffs");
  const int c = a.cutoff;
  Matrix out(Eigen::Index(c) * c, Eigen::Index(c) * c);
  for (int i = 0; i < c; ++i)
    for (int k = 0; k < c; ++k)
      out.block(Eigen::Index(i) * c, Eigen::Index(k) * c, c, c) =
          a.entries(i, k) * b.entries;
  return {std::move(out), BasisTag::TwoMode, c};
}

inline ComplexOperator commutator(const ComplexOperator& a,
                                  const ComplexOperator& b) {
  require_same_basis(a, b);
  return {a.entries * b.entries - b.entries * a.entries, a.basis_tag,
          a.cutoff};
}

// Sub-matrix over basis states with every mode index < keep.
inline ComplexOperator interior_block(const ComplexOperator& m, int keep) {
  if (keep <= 0 || keep >= m.cutoff)
    throw InvalidTruncationError("interior_block requires 0 < keep < cutoff");
  if (m.basis_tag == BasisTag::SingleMode)
    return {m.entries.topLeftCorner(keep, keep), BasisTag::SingleMode, keep};
  const int c = m.cutoff;
  Matrix out(Eigen::Index(keep) * keep, Eigen::Index(keep) * keep);
  for (int i = 0; i < keep; ++i)
    for (int k = 0; k < keep; ++k)
      out.block(Eigen::Index(i) * keep, Eigen::Index(k) * keep, keep, keep) =
          m.entries.block(Eigen::Index(i) * c, Eigen::Index(k) * c, keep, keep);
  return {std::move(out), BasisTag::TwoMode, keep};
}

inline int default_keep(int cutoff) { return cutoff / 2; }

// Max-magnitude entry of the interior block: the workhorse deviation norm.
inline double interior_dev(const ComplexOperator& m, int keep) {
  return interior_block(m, keep).entries.cwiseAbs().maxCoeff();
}
inline double interior_dev(const ComplexOperator& m) {
  return interior_dev(m, default_keep(m.cutoff));
}

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }
inline double max_abs(const ComplexOperator& m) { return max_abs(m.entries); }

// Matrix exponential (Pade + scaling-and-squaring).
inline ComplexOperator expm(const ComplexOperator& m) {
  Matrix e = m.entries.exp();
  if (!e.allFinite())
    throw ScalingFailureError("matrix exponential overflowed to non-finite values");
  return {std::move(e), m.basis_tag, m.cutoff};
}

// Mode-local one-sided products on a TwoMode matrix. With f a cutoff-sized
// single-mode factor these evaluate (f (x) I)*M, (I (x) f)*M, M*(f (x) I),
// M*(I (x) f) without ever forming the two-mode kron of metric factors --
// intermediates stay at single-mode magnitude.
inline Matrix mode1_lmul(const Matrix& f, const Matrix& m, int c) {
  Matrix out = Matrix::Zero(m.rows(), m.cols());
  for (int i = 0; i < c; ++i)
    for (int a = 0; a < c; ++a) {
      const Complex w = f(i, a);
      if (w != Complex(0.0, 0.0))
        out.middleRows(Eigen::Index(i) * c, c) +=
            w * m.middleRows(Eigen::Index(a) * c, c);
    }
  return out;
}
inline Matrix mode2_lmul(const Matrix& f, const Matrix& m, int c) {
  Matrix out(m.rows(), m.cols());
  for (int i = 0; i < c; ++i)
    out.middleRows(Eigen::Index(i) * c, c) =
        f * m.middleRows(Eigen::Index(i) * c, c);
  return out;
}
inline Matrix mode1_rmul(const Matrix& m, const Matrix& f, int c) {
  Matrix out = Matrix::Zero(m.rows(), m.cols());
  for (int a = 0; a < c; ++a)
    for (int k = 0; k < c; ++k) {
      const Complex w = f(a, k);
      if (w != Complex(0.0, 0.0))
        out.middleCols(Eigen::Index(k) * c, c) +=
            w * m.middleCols(Eigen::Index(a) * c, c);
    }
  return out;
}
inline Matrix mode2_rmul(const Matrix& m, const Matrix& f, int c) {
  Matrix out(m.rows(), m.cols());
  for (int k = 0; k < c; ++k)
    out.middleCols(Eigen::Index(k) * c, c) =
        m.middleCols(Eigen::Index(k) * c, c) * f;
  return out;
}

}  // namespace pseudoherm

#endif  // PSEUDOHERM_OPERATORS_HPP
