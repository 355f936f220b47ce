#ifndef PSEUDOHERM_REPORT_HPP
#define PSEUDOHERM_REPORT_HPP

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pseudoherm/noncommutative.hpp"
#include "pseudoherm/operators.hpp"
#include "pseudoherm/oscillator.hpp"

namespace pseudoherm {

using Json = nlohmann::ordered_json;

// One verification record. `pass` is authoritative; `deviation` and
// `tolerance` document the measurement that produced it.
struct CheckRow {
  std::string name;
  std::string norm_type = "max_interior";
  double deviation = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

// pass iff deviation < tolerance; NaN deviation always fails.
inline CheckRow make_check(std::string name, double deviation, double tolerance,
                           std::string norm_type = "max_interior") {
  CheckRow row;
  row.name = std::move(name);
  row.norm_type = std::move(norm_type);
  row.deviation = deviation;
  row.tolerance = tolerance;
  row.pass = deviation < tolerance;  // false for NaN
  return row;
}

// pass iff deviation > floor: rows asserting a quantity is bounded away from
// zero (e.g. a genuinely non-Hermitian number operator).
inline CheckRow make_floor_check(std::string name, double deviation,
                                 double floor,
                                 std::string norm_type = "max_interior") {
  CheckRow row;
  row.name = std::move(name);
  row.norm_type = std::move(norm_type);
  row.deviation = deviation;
  row.tolerance = floor;
  row.pass = deviation > floor;  // false for NaN
  return row;
}

inline Json check_to_json(const CheckRow& row) {
  Json j;
  j["name"] = row.name;
  j["norm_type"] = row.norm_type;
  j["deviation"] = row.deviation;
  j["tolerance"] = row.tolerance;
  j["pass"] = row.pass;
  return j;
}

inline Json checks_to_json(const std::vector<CheckRow>& rows) {
  Json j = Json::array();
  for (const CheckRow& row : rows) j.push_back(check_to_json(row));
  return j;
}

namespace detail {

// %.17g round-trips doubles exactly and keeps CSV output byte-stable.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

}  // namespace detail

inline Json spectrum_row_to_json(const SpectrumRow& row) {
  Json j;
  j["n1"] = row.n1;
  j["n2"] = row.n2;
  j["analytic"] = row.analytic;
  j["numeric_re"] = row.numeric.real();
  j["numeric_im"] = row.numeric.imag();
  j["residual"] = row.residual;
  return j;
}

inline Json spectrum_table_to_json(const SpectrumTable& table) {
  Json j = Json::array();
  for (const SpectrumRow& row : table.rows) j.push_back(spectrum_row_to_json(row));
  return j;
}

inline std::string spectrum_table_to_csv(const SpectrumTable& table) {
  std::string out = "n1,n2,analytic,numeric_re,numeric_im,residual\n";
  for (const SpectrumRow& row : table.rows) {
    out += std::to_string(row.n1);
    out += ',';
    out += std::to_string(row.n2);
    out += ',';
    out += detail::format_double(row.analytic);
    out += ',';
    out += detail::format_double(row.numeric.real());
    out += ',';
    out += detail::format_double(row.numeric.imag());
    out += ',';
    out += detail::format_double(row.residual);
    out += '\n';
  }
  return out;
}

// Deformed-oscillator tables carry the deformation parameters and the
// second-order constant offset alongside each row.
inline Json nc_spectrum_table_to_json(const SpectrumTable& table,
                                      const NCParams& prm) {
  const double c2 = order2_constant(prm);
  Json j = Json::array();
  for (const SpectrumRow& row : table.rows) {
    Json r = spectrum_row_to_json(row);
    r["theta"] = prm.theta;
    r["theta_tilde"] = prm.theta_tilde;
    r["order2_constant"] = c2;
    j.push_back(r);
  }
  return j;
}

inline std::string nc_spectrum_table_to_csv(const SpectrumTable& table,
                                            const NCParams& prm) {
  const double c2 = order2_constant(prm);
  std::string out =
      "n1,n2,analytic,numeric_re,numeric_im,residual,theta,theta_tilde,"
      "order2_constant\n";
  for (const SpectrumRow& row : table.rows) {
    out += std::to_string(row.n1);
    out += ',';
    out += std::to_string(row.n2);
    out += ',';
    out += detail::format_double(row.analytic);
    out += ',';
    out += detail::format_double(row.numeric.real());
    out += ',';
    out += detail::format_double(row.numeric.imag());
    out += ',';
    out += detail::format_double(row.residual);
    out += ',';
    out += detail::format_double(prm.theta);
    out += ',';
    out += detail::format_double(prm.theta_tilde);
    out += ',';
    out += detail::format_double(c2);
    out += '\n';
  }
  return out;
}

// Row-major dump with explicit [re, im] pairs; intended for debugging and
// for feeding matrices to external tooling.
inline Json operator_to_json(const ComplexOperator& op) {
  Json j;
  j["dim"] = op.dim();
  j["basis_tag"] = basis_tag_name(op.basis_tag);
  j["cutoff"] = op.cutoff;
  Json entries = Json::array();
  for (Eigen::Index r = 0; r < op.dim(); ++r)
    for (Eigen::Index c = 0; c < op.dim(); ++c) {
      const Complex v = op.entries(r, c);
      entries.push_back(Json::array({v.real(), v.imag()}));
    }
  j["entries"] = entries;
  return j;
}

// Overlap matrix rows as (n, m, re, im, |entry - delta|).
inline std::string gram_to_csv(const Matrix& gram) {
  std::string out = "n,m,re,im,abs_dev\n";
  for (Eigen::Index n = 0; n < gram.rows(); ++n)
    for (Eigen::Index m = 0; m < gram.cols(); ++m) {
      const Complex v = gram(n, m);
      const double dev = std::abs(v - (n == m ? Complex(1.0) : Complex(0.0)));
      out += std::to_string(n);
      out += ',';
      out += std::to_string(m);
      out += ',';
      out += detail::format_double(v.real());
      out += ',';
      out += detail::format_double(v.imag());
      out += ',';
      out += detail::format_double(dev);
      out += '\n';
    }
  return out;
}

inline Json gram_to_json(const Matrix& gram) {
  Json j = Json::array();
  for (Eigen::Index n = 0; n < gram.rows(); ++n)
    for (Eigen::Index m = 0; m < gram.cols(); ++m) {
      const Complex v = gram(n, m);
      Json r;
      r["n"] = static_cast<int>(n);
      r["m"] = static_cast<int>(m);
      r["re"] = v.real();
      r["im"] = v.imag();
      r["abs_dev"] = std::abs(v - (n == m ? Complex(1.0) : Complex(0.0)));
      j.push_back(r);
    }
  return j;
}

inline Json evolve_to_json(const std::vector<double>& t_grid,
                           const std::vector<double>& norms) {
  Json j = Json::array();
  const size_t n = std::min(t_grid.size(), norms.size());
  for (size_t k = 0; k < n; ++k) {
    Json r;
    r["t"] = t_grid[k];
    r["eta_norm"] = norms[k];
    j.push_back(r);
  }
  return j;
}

inline std::string evolve_to_csv(const std::vector<double>& t_grid,
                                 const std::vector<double>& norms) {
  std::string out = "t,eta_norm\n";
  const size_t n = std::min(t_grid.size(), norms.size());
  for (size_t k = 0; k < n; ++k) {
    out += detail::format_double(t_grid[k]);
    out += ',';
    out += detail::format_double(norms[k]);
    out += '\n';
  }
  return out;
}

inline Json scaling_report_to_json(const ScalingReport& report) {
  Json j = Json::array();
  for (const ScalingRow& row : report.rows) {
    Json r;
    r["n1"] = row.n1;
    r["n2"] = row.n2;
    r["residual_coarse"] = row.residual_coarse;
    r["residual_fine"] = row.residual_fine;
    r["ratio"] = row.ratio;
    r["pass"] = row.pass;
    j.push_back(r);
  }
  return j;
}

inline std::string scaling_report_to_csv(const ScalingReport& report) {
  std::string out = "n1,n2,residual_coarse,residual_fine,ratio,pass\n";
  for (const ScalingRow& row : report.rows) {
    out += std::to_string(row.n1);
    out += ',';
    out += std::to_string(row.n2);
    out += ',';
    out += detail::format_double(row.residual_coarse);
    out += ',';
    out += detail::format_double(row.residual_fine);
    out += ',';
    out += detail::format_double(row.ratio);
    out += ',';
    out += (row.pass ? "true" : "false");
    out += '\n';
  }
  return out;
}

inline Json ladder_report_to_json(const LadderReport& report) {
  Json j = Json::array();
  for (const LadderCheckRow& row : report.rows) {
    Json r;
    r["name"] = row.name;
    r["deviation"] = row.deviation;
    j.push_back(r);
  }
  return j;
}

}  // namespace pseudoherm

#endif  // PSEUDOHERM_REPORT_HPP
