#ifndef PSEUDOHERM_METRIC_HPP
#define PSEUDOHERM_METRIC_HPP

#include <Eigen/Eigenvalues>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "operators.hpp"

namespace pseudoherm {

// Positive-definite metric eta_plus = parity * v_op with its cached inverse
// and quality diagnostics. When the metric factorizes over the two modes the
// single-mode factors are kept so conjugations can stay mode-local.
struct MetricBundle {
  ComplexOperator parity;
  ComplexOperator v_op;
  ComplexOperator eta_plus;
  ComplexOperator eta_inverse;
  double herm_deviation = 0.0;  // interior-block deviation of eta from eta^dag
  double min_metric_eig = 0.0;  // smallest eig of Hermitized interior block
  // When non-empty: eta_plus = kron(mode_eta[0], mode_eta[1]) and likewise
  // for the inverse factors; conjugation then works one mode at a time.
  std::vector<Matrix> mode_eta;
  std::vector<Matrix> mode_eta_inv;
  bool is_identity = false;
};

// Interior-block Hermiticity deviation and minimum Hermitized eigenvalue.
inline void metric_diagnostics(MetricBundle& b) {
  const ComplexOperator block =
      interior_block(b.eta_plus, default_keep(b.eta_plus.cutoff));
  b.herm_deviation = max_abs(block.entries - block.entries.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(
      ((block.entries + block.entries.adjoint()) / 2.0).eval());
  b.min_metric_eig = es.eigenvalues().minCoeff();
}

inline MetricBundle identity_metric(BasisTag tag, int cutoff) {
  MetricBundle b;
  b.parity = identity_like(tag, cutoff);
  b.v_op = identity_like(tag, cutoff);
  b.eta_plus = identity_like(tag, cutoff);
  b.eta_inverse = identity_like(tag, cutoff);
  b.herm_deviation = 0.0;
  b.min_metric_eig = 1.0;
  b.is_identity = true;
  return b;
}

// Metric adjoint eta_inverse * A^dag * eta_plus. The identity bundle returns
// the conjugate transpose bitwise. A mode-factorized bundle evaluates the
// sandwich as four mode-local products, which never materializes two-mode
// metric intermediates; otherwise the full triple product is formed.
inline ComplexOperator pseudo_adjoint(const ComplexOperator& a,
                                      const MetricBundle& eta) {
  if (eta.eta_plus.basis_tag != a.basis_tag || eta.eta_plus.dim() != a.dim())
    throw BasisMismatchError(
        "pseudo_adjoint requires the operator and metric to share a basis");
  if (eta.is_identity) return conj_transpose(a);
  if (a.basis_tag == BasisTag::TwoMode && eta.mode_eta.size() == 2) {
    const int c = a.cutoff;
    Matrix ad = a.entries.adjoint();
    ad = mode2_lmul(eta.mode_eta_inv[1], ad, c);
    ad = mode1_lmul(eta.mode_eta_inv[0], ad, c);
    ad = mode2_rmul(ad, eta.mode_eta[1], c);
    ad = mode1_rmul(ad, eta.mode_eta[0], c);
    return {std::move(ad), a.basis_tag, c};
  }
  return {eta.eta_inverse.entries * a.entries.adjoint() * eta.eta_plus.entries,
          a.basis_tag, a.cutoff};
}

}  // namespace pseudoherm

#endif  // PSEUDOHERM_METRIC_HPP
