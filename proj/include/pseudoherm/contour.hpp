#ifndef PSEUDOHERM_CONTOUR_HPP
#define PSEUDOHERM_CONTOUR_HPP

#include <array>
#include <cmath>
#include <numbers>
#include <utility>

#include "errors.hpp"
#include "oscillator.hpp"

namespace pseudoherm {

// Physicists' Hermite polynomial by the three-term recurrence. Degrees stay
// small enough that the values, though large, remain well inside double range.
inline Complex hermite(int n, Complex z) {
  if (n < 0 || n > 60)
    throw DegreeLimitError("hermite degree must lie in [0, 60]");
  if (n == 0) return 1.0;
  Complex h_prev = 1.0;
  Complex h = 2.0 * z;
  for (int k = 1; k < n; ++k) {
    const Complex h_next = 2.0 * z * h - 2.0 * double(k) * h_prev;
    h_prev = h;
    h = h_next;
  }
  return h;
}

// Eigenfunction phi_n evaluated on the shifted line X = x + iA:
// pi^{-1/4} (2^n n!)^{-1/2} e^{-X^2/2 + BX} H_n(X).
struct Wavefunction {
  int n = 0;
  ModelParams params;
};

inline Complex eval_wavefunction(const Wavefunction& w, double x) {
  if (!std::isfinite(x))
    throw PreconditionError("wavefunction argument must be finite");
  const Complex X(x, w.params.A);
  const double log_norm =
      -0.5 * (double(w.n) * std::log(2.0) + std::lgamma(double(w.n) + 1.0));
  const double pi_factor = std::pow(std::numbers::pi, -0.25);
  return pi_factor * std::exp(log_norm) *
         std::exp(-0.5 * X * X + w.params.B * X) * hermite(w.n, X);
}

enum class QuadratureRule { GaussLegendreComposite, Trapezoid };

// Finite window [-L, L] capturing the Gaussian-decaying integrand to beyond
// double precision, plus the node budget to resolve it.
struct QuadratureScheme {
  double half_width = 0.0;
  int node_count = 0;
  QuadratureRule rule = QuadratureRule::GaussLegendreComposite;
};

inline double required_half_width(const ModelParams& prm, int n_max) {
  return 8.0 + std::abs(prm.A) + std::abs(prm.B) +
         std::sqrt(2.0 * double(n_max) + 1.0);
}

inline QuadratureScheme default_scheme(const ModelParams& prm, int n_max) {
  QuadratureScheme s;
  s.half_width = required_half_width(prm, n_max);
  const int panels = std::max(7, int(std::ceil(s.half_width / 1.76)));
  s.node_count = 32 * panels;
  s.rule = QuadratureRule::GaussLegendreComposite;
  return s;
}

namespace detail {

inline const std::pair<std::array<double, 32>, std::array<double, 32>>&
gauss_legendre_32() {
  static const auto nodes_weights = [] {
    constexpr int n = 32;
    std::array<double, n> x{};
    std::array<double, n> w{};
    for (int i = 0; i < n / 2; ++i) {
      double xi = std::cos(std::numbers::pi * (double(i) + 0.75) /
                           (double(n) + 0.5));
      double p1 = 0.0, p0 = 0.0, dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        p0 = 1.0;
        p1 = xi;
        for (int k = 2; k <= n; ++k) {
          const double p2 =
              ((2.0 * k - 1.0) * xi * p1 - (k - 1.0) * p0) / double(k);
          p0 = p1;
          p1 = p2;
        }
        dp = double(n) * (xi * p1 - p0) / (xi * xi - 1.0);
        const double dx = p1 / dp;
        xi -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      p0 = 1.0;
      p1 = xi;
      for (int k = 2; k <= n; ++k) {
        const double p2 =
            ((2.0 * k - 1.0) * xi * p1 - (k - 1.0) * p0) / double(k);
        p0 = p1;
        p1 = p2;
      }
      dp = double(n) * (xi * p1 - p0) / (xi * xi - 1.0);
      x[size_t(n - 1 - i)] = xi;
      x[size_t(i)] = -xi;
      w[size_t(i)] = w[size_t(n - 1 - i)] = 2.0 / ((1.0 - xi * xi) * dp * dp);
    }
    return std::make_pair(x, w);
  }();
  return nodes_weights;
}

}  // namespace detail

// Integrate f over [-L, L] under the scheme's rule and node budget.
template <class F>
Complex integrate(const QuadratureScheme& s, F&& f) {
  if (s.half_width <= 0.0 || s.node_count < 2)
    throw PreconditionError("quadrature scheme is degenerate");
  Complex acc(0.0, 0.0);
  if (s.rule == QuadratureRule::GaussLegendreComposite) {
    const auto& [gx, gw] = detail::gauss_legendre_32();
    const int panels = (s.node_count + 31) / 32;
    const double width = 2.0 * s.half_width / double(panels);
    for (int p = 0; p < panels; ++p) {
      const double a = -s.half_width + double(p) * width;
      for (int i = 0; i < 32; ++i) {
        const double x = a + width * (gx[size_t(i)] + 1.0) / 2.0;
        acc += (width / 2.0) * gw[size_t(i)] * f(x);
      }
    }
  } else {
    const double h = 2.0 * s.half_width / double(s.node_count - 1);
    for (int i = 0; i < s.node_count; ++i) {
      const double x = -s.half_width + double(i) * h;
      const double w = (i == 0 || i == s.node_count - 1) ? h / 2.0 : h;
      acc += w * f(x);
    }
  }
  return acc;
}

// Metric inner product of eigenfunctions along the shifted line:
// integral of conj(phi_n(x+iA)) * (-1)^m * phi_m(-x+iA) dx. The sign flip of
// the real integration variable realizes the parity factor and the scalar
// (-1)^m the grading factor, so the result approximates delta_{nm}. Always
// evaluated twice, at the given node budget and at double; disagreement above
// 1e-10 rejects the scheme, otherwise the finer value is returned.
struct InnerProductDiagnostic {
  Complex value;          // integral at the doubled node budget
  double doubling_delta;  // |refined - coarse| convergence estimate
};

inline InnerProductDiagnostic contour_inner_product_diagnostic(
    int n, int m, const ModelParams& prm, const QuadratureScheme& scheme) {
  if (n < 0 || m < 0) throw PreconditionError("negative Hermite degree");
  const double needed = required_half_width(prm, std::max(n, m));
  if (scheme.node_count < 200 || scheme.half_width < needed - 1e-12)
    throw PreconditionError(
        "quadrature scheme too small for the requested degrees");
  const Wavefunction wn{n, prm};
  const Wavefunction wm{m, prm};
  const double sign = (m % 2 == 0) ? 1.0 : -1.0;
  auto integrand = [&](double x) {
    return std::conj(eval_wavefunction(wn, x)) * sign *
           eval_wavefunction(wm, -x);
  };
  const Complex coarse = integrate(scheme, integrand);
  QuadratureScheme fine = scheme;
  fine.node_count *= 2;
  const Complex refined = integrate(fine, integrand);
  return {refined, std::abs(refined - coarse)};
}

inline Complex contour_inner_product(int n, int m, const ModelParams& prm,
                                     const QuadratureScheme& scheme) {
  const InnerProductDiagnostic d =
      contour_inner_product_diagnostic(n, m, prm, scheme);
  if (d.doubling_delta > 1e-10)
    throw InsufficientQuadratureError(
        "node doubling moved the integral by " +
        std::to_string(d.doubling_delta) + "; increase the node budget");
  return d.value;
}

// All pairwise inner products for degrees 0..n_max; approximates the identity.
inline Matrix gram_matrix(int n_max, const ModelParams& prm,
                          const QuadratureScheme& scheme) {
  Matrix g(n_max + 1, n_max + 1);
  for (int n = 0; n <= n_max; ++n)
    for (int m = 0; m <= n_max; ++m)
      g(n, m) = contour_inner_product(n, m, prm, scheme);
  return g;
}

inline double identity_deviation(const Matrix& g) {
  return max_abs(Matrix(g - Matrix::Identity(g.rows(), g.cols())));
}

// Matrix-side counterpart of gram_matrix for cross-checking the quadrature:
// metric-normalized low-lying eigenvectors of the single-mode Hamiltonian,
// paired through the single-mode metric. Entries approximate delta_{nm}.
inline Matrix matrix_gram(int n_max, const ModelParams& prm) {
  const int c = prm.cutoff;
  if (2 * (n_max + 1) > c)
    throw PreconditionError("matrix_gram needs cutoff > 2*(n_max+1)");
  ComplexOperator h{detail::single_mode_h(prm.A, prm.B, c),
                    BasisTag::SingleMode, c};
  const SpectralDecomposition eig = eig_general(h);
  const MetricBundle eta1 = single_mode_metric(prm.A, prm.B, c);
  Matrix states(c, n_max + 1);
  for (int k = 0; k <= n_max; ++k) {
    Vector v = eig.right_vectors.col(k);
    const Complex q = v.dot(eta1.eta_plus.entries * v);
    if (!(q.real() > 0.0))
      throw MetricNotPositiveError(
          "eigenstate has non-positive metric norm; cutoff too small",
          q.real());
    states.col(k) = v / std::sqrt(q.real());
  }
  Matrix g(n_max + 1, n_max + 1);
  for (int n = 0; n <= n_max; ++n)
    for (int m = 0; m <= n_max; ++m)
      g(n, m) = states.col(n).dot(eta1.eta_plus.entries * states.col(m));
  return g;
}

}  // namespace pseudoherm

#endif  // PSEUDOHERM_CONTOUR_HPP
