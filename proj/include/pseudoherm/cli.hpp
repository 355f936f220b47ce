#ifndef PSEUDOHERM_CLI_HPP
#define PSEUDOHERM_CLI_HPP

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pseudoherm/contour.hpp"
#include "pseudoherm/metric.hpp"
#include "pseudoherm/noncommutative.hpp"
#include "pseudoherm/operators.hpp"
#include "pseudoherm/oscillator.hpp"
#include "pseudoherm/report.hpp"

namespace pseudoherm {

enum class Command {
  None,
  Spectrum,
  NcSpectrum,
  Verify,
  Quadrature,
  Evolve,
  Scaling,
};

inline const char* command_name(Command c) {
  switch (c) {
    case Command::Spectrum: return "spectrum";
    case Command::NcSpectrum: return "nc-spectrum";
    case Command::Verify: return "verify";
    case Command::Quadrature: return "quadrature";
    case Command::Evolve: return "evolve";
    case Command::Scaling: return "scaling";
    default: return "none";
  }
}

struct RunConfig {
  Command command = Command::None;
  double A = 0.0;
  double B = 0.0;
  double theta = 0.0;
  double theta_tilde = 0.0;
  int cutoff = 30;
  int count = 10;
  int n_max = 5;
  double t_max = 10.0;
  int t_steps = 50;
  std::string out_path;  // empty -> stdout
  std::string format = "json";
};

struct Report {
  RunConfig config_echo;
  std::vector<CheckRow> checks;
  Json tables = Json::object();
  std::string table_csv;  // primary table in CSV form, empty if none
  long long wallclock_ms = 0;
  std::string version = "1.0.0";
};

inline Json config_to_json(const RunConfig& cfg) {
  Json j;
  j["command"] = command_name(cfg.command);
  j["A"] = cfg.A;
  j["B"] = cfg.B;
  j["theta"] = cfg.theta;
  j["theta_tilde"] = cfg.theta_tilde;
  j["cutoff"] = cfg.cutoff;
  j["count"] = cfg.count;
  j["n_max"] = cfg.n_max;
  j["t_max"] = cfg.t_max;
  j["t_steps"] = cfg.t_steps;
  j["out_path"] = cfg.out_path;
  j["format"] = cfg.format;
  return j;
}

inline Json report_to_json(const Report& r) {
  Json j;
  j["config_echo"] = config_to_json(r.config_echo);
  j["checks"] = checks_to_json(r.checks);
  j["tables"] = r.tables;
  j["wallclock_ms"] = r.wallclock_ms;
  j["version"] = r.version;
  return j;
}

inline std::string checks_to_csv(const std::vector<CheckRow>& rows) {
  std::string out = "name,norm_type,deviation,tolerance,pass\n";
  for (const CheckRow& row : rows) {
    out += row.name;
    out += ',';
    out += row.norm_type;
    out += ',';
    out += detail::format_double(row.deviation);
    out += ',';
    out += detail::format_double(row.tolerance);
    out += ',';
    out += (row.pass ? "true" : "false");
    out += '\n';
  }
  return out;
}

// CSV output carries the command's primary table when it has one, otherwise
// the check rows; JSON carries everything.
inline std::string render_report(const Report& r) {
  if (r.config_echo.format == "csv")
    return r.table_csv.empty() ? checks_to_csv(r.checks) : r.table_csv;
  return report_to_json(r).dump(2) + "\n";
}

inline bool all_checks_pass(const Report& r) {
  for (const CheckRow& row : r.checks)
    if (!row.pass) return false;
  return true;
}

// Flag-level usage problem detected after CLI11 parsing (cross-field
// constraints, deformation guard). Mapped to the usage exit code.
struct UsageError : Error {
  using Error::Error;
};

namespace detail {

inline void validate_config(const RunConfig& cfg) {
  if (!std::isfinite(cfg.A) || !std::isfinite(cfg.B) ||
      !std::isfinite(cfg.theta) || !std::isfinite(cfg.theta_tilde) ||
      !std::isfinite(cfg.t_max))
    throw UsageError("all numeric flags must be finite");
  if (cfg.cutoff < 8) throw UsageError("--cutoff must be at least 8");
  if (cfg.count < 1) throw UsageError("--count must be positive");
  if (cfg.n_max < 0) throw UsageError("--n-max must be non-negative");
  if (cfg.t_max <= 0.0) throw UsageError("--t-max must be positive");
  if (cfg.t_steps < 1) throw UsageError("--t-steps must be positive");
  if (std::abs(cfg.theta) > 0.2 || std::abs(cfg.theta_tilde) > 0.2)
    throw UsageError(
        "deformation parameters beyond 0.2 are outside the validated regime");
  switch (cfg.command) {
    case Command::Spectrum:
    case Command::NcSpectrum:
      if (4 * cfg.count > cfg.cutoff * cfg.cutoff)
        throw UsageError("--count too large for this --cutoff");
      break;
    case Command::Verify:
      if (2 * cfg.n_max > cfg.cutoff)
        throw UsageError("--n-max too large for this --cutoff");
      break;
    case Command::Quadrature:
      if (cfg.n_max > 60)
        throw UsageError("--n-max exceeds the supported Hermite degree");
      if (2 * (cfg.n_max + 1) > cfg.cutoff)
        throw UsageError("--n-max too large for this --cutoff");
      break;
    default:
      break;
  }
}

}  // namespace detail

// Parses a full argument vector (without the program name). Throws
// CLI::ParseError for flag-level problems and UsageError for cross-field
// constraint violations; both map to the usage exit code.
inline RunConfig parse_args(const std::vector<std::string>& args) {
  RunConfig cfg;
  CLI::App app{"pseudo-Hermitian two-mode oscillator toolkit"};
  app.require_subcommand(1);

  auto add_common = [&cfg](CLI::App* sub) {
    sub->add_option("--A", cfg.A, "imaginary shift of the positions");
    sub->add_option("--B", cfg.B, "imaginary shift of the momenta");
    sub->add_option("--cutoff", cfg.cutoff, "Fock levels per mode");
    sub->add_option("--out-path", cfg.out_path,
                    "output file (default: stdout)");
    sub->add_option("--format", cfg.format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
  };

  CLI::App* spectrum = app.add_subcommand("spectrum", "lowest eigenvalues");
  add_common(spectrum);
  spectrum->add_option("--count", cfg.count, "number of levels");

  CLI::App* nc = app.add_subcommand("nc-spectrum",
                                    "lowest eigenvalues of the deformed model");
  add_common(nc);
  nc->add_option("--count", cfg.count, "number of levels");
  nc->add_option("--theta", cfg.theta, "position-sector deformation");
  nc->add_option("--theta-tilde", cfg.theta_tilde,
                 "momentum-sector deformation");

  CLI::App* verify =
      app.add_subcommand("verify", "structural identities of the model");
  add_common(verify);
  verify->add_option("--n-max", cfg.n_max, "ladder states checked per mode");

  CLI::App* quad = app.add_subcommand(
      "quadrature", "contour inner products against the matrix metric");
  add_common(quad);
  quad->add_option("--n-max", cfg.n_max, "highest wavefunction degree");

  CLI::App* evolve =
      app.add_subcommand("evolve", "metric norm along the time evolution");
  add_common(evolve);
  evolve->add_option("--t-max", cfg.t_max, "end of the time grid");
  evolve->add_option("--t-steps", cfg.t_steps, "number of grid steps");

  CLI::App* scaling = app.add_subcommand(
      "scaling", "first-order shrinkage of the splitting residuals");
  add_common(scaling);

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("pseudoherm");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    throw;  // not an error; the front end prints help and exits 0
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  if (spectrum->parsed()) cfg.command = Command::Spectrum;
  else if (nc->parsed()) cfg.command = Command::NcSpectrum;
  else if (verify->parsed()) cfg.command = Command::Verify;
  else if (quad->parsed()) cfg.command = Command::Quadrature;
  else if (evolve->parsed()) cfg.command = Command::Evolve;
  else if (scaling->parsed()) cfg.command = Command::Scaling;

  detail::validate_config(cfg);
  return cfg;
}

inline std::string cli_help_text() {
  CLI::App app{"pseudo-Hermitian two-mode oscillator toolkit"};
  app.require_subcommand(1);
  app.add_subcommand("spectrum", "lowest eigenvalues");
  app.add_subcommand("nc-spectrum", "lowest eigenvalues of the deformed model");
  app.add_subcommand("verify", "structural identities of the model");
  app.add_subcommand("quadrature",
                     "contour inner products against the matrix metric");
  app.add_subcommand("evolve", "metric norm along the time evolution");
  app.add_subcommand("scaling", "first-order shrinkage of splitting residuals");
  return app.help();
}

namespace detail {

inline void run_spectrum(const RunConfig& cfg, Report& report) {
  const ModelParams prm{cfg.A, cfg.B, cfg.cutoff};
  const ModelOperators ops = build_model(prm);
  const SpectrumTable table = spectrum_numeric(ops, cfg.count);
  double max_res = 0.0, max_im = 0.0;
  for (const SpectrumRow& row : table.rows) {
    max_res = std::max(max_res, row.residual);
    max_im = std::max(max_im, std::abs(row.numeric.imag()));
  }
  report.checks.push_back(make_check("spectrum_max_residual", max_res, 1e-8,
                                     "eigenvalue_residual"));
  report.checks.push_back(
      make_check("spectrum_max_imag", max_im, 1e-8, "eigenvalue_imag"));
  report.tables["spectrum"] = spectrum_table_to_json(table);
  report.table_csv = spectrum_table_to_csv(table);
}

inline void run_nc_spectrum(const RunConfig& cfg, Report& report) {
  const NCParams prm{{cfg.A, cfg.B, cfg.cutoff}, cfg.theta, cfg.theta_tilde};
  const SpectrumTable table = nc_spectrum_numeric(prm, cfg.cutoff, cfg.count);
  double max_res = 0.0, max_im = 0.0;
  for (const SpectrumRow& row : table.rows) {
    max_res = std::max(max_res, row.residual);
    max_im = std::max(max_im, std::abs(row.numeric.imag()));
  }
  report.checks.push_back(make_check("nc_spectrum_max_residual", max_res, 1e-3,
                                     "eigenvalue_residual"));
  report.checks.push_back(
      make_check("nc_spectrum_max_imag", max_im, 1e-8, "eigenvalue_imag"));
  report.tables["nc_spectrum"] = nc_spectrum_table_to_json(table, prm);
  report.table_csv = nc_spectrum_table_to_csv(table, prm);
}

inline void run_verify(const RunConfig& cfg, Report& report) {
  const ModelParams prm{cfg.A, cfg.B, cfg.cutoff};
  const ModelOperators ops = build_model(prm);

  report.checks.push_back(make_check("hamiltonian_build_agreement",
                                     ops.build_agreement, 1e-12, "max_abs"));
  const double parity_dev =
      max_abs(ops.parity.entries * ops.H.entries -
              ops.H.entries.adjoint() * ops.parity.entries);
  report.checks.push_back(
      make_check("parity_pseudo_hermiticity", parity_dev, 1e-12, "max_abs"));
  report.checks.push_back(make_check("metric_hermiticity_interior",
                                     ops.metric.herm_deviation, 1e-6));
  report.checks.push_back(make_check("metric_positive_definite",
                                     -ops.metric.min_metric_eig, 0.0,
                                     "negated_interior_min_eig"));
  report.checks.push_back(make_check(
      "commutator_H_V_interior",
      interior_dev(commutator(ops.H, ops.metric.v_op)), 1e-6));
  const Matrix intertwine = ops.metric.eta_plus.entries * ops.H.entries -
                            ops.H.entries.adjoint() *
                                ops.metric.eta_plus.entries;
  report.checks.push_back(make_check(
      "eta_intertwines_H_interior",
      interior_dev(ComplexOperator{intertwine, BasisTag::TwoMode, cfg.cutoff}),
      1e-6));

  const LadderReport ladder = verify_ladder(ops, cfg.n_max);
  for (const LadderCheckRow& row : ladder.rows) {
    const bool statewise = row.name.find('|') != std::string::npos;
    report.checks.push_back(
        make_check("ladder: " + row.name, row.deviation, 1e-6,
                   statewise ? "vector_2norm" : "max_interior"));
  }

  // A genuinely non-Hermitian number operator only emerges once both
  // couplings are well away from zero; below that the gap check is vacuous.
  if (std::abs(cfg.A) >= 0.3 && std::abs(cfg.B) >= 0.3) {
    for (int j = 0; j < 2; ++j) {
      const double gap = max_abs(ops.N[size_t(j)].entries -
                                 ops.N[size_t(j)].entries.adjoint());
      report.checks.push_back(make_floor_check(
          "number_op_" + std::to_string(j + 1) + "_nonhermitian", gap, 0.01,
          "max_abs"));
    }
  }

  double xp_dev = 0.0;
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k) {
      ComplexOperator comm = commutator(ops.X[size_t(j)], ops.P_mom[size_t(k)]);
      if (j == k)
        comm.entries -= Complex(0.0, 1.0) *
                        Matrix::Identity(comm.dim(), comm.dim());
      xp_dev = std::max(xp_dev, interior_dev(comm));
    }
  report.checks.push_back(
      make_check("commutator_X_P_interior", xp_dev, 1e-10));

  report.tables["ladder"] = ladder_report_to_json(ladder);
}

inline void run_quadrature(const RunConfig& cfg, Report& report) {
  const ModelParams prm{cfg.A, cfg.B, cfg.cutoff};
  const QuadratureScheme scheme = default_scheme(prm, cfg.n_max);
  Matrix gram(cfg.n_max + 1, cfg.n_max + 1);
  double max_delta = 0.0;
  for (int n = 0; n <= cfg.n_max; ++n)
    for (int m = 0; m <= cfg.n_max; ++m) {
      const InnerProductDiagnostic d =
          contour_inner_product_diagnostic(n, m, prm, scheme);
      gram(n, m) = d.value;
      max_delta = std::max(max_delta, d.doubling_delta);
    }
  report.checks.push_back(make_check("gram_identity_deviation",
                                     identity_deviation(gram), 1e-8,
                                     "max_abs"));
  report.checks.push_back(
      make_check("node_doubling_delta", max_delta, 1e-10, "max_abs"));

  const int k = std::min(cfg.n_max, 3);
  const Matrix mg = matrix_gram(k, prm);
  double cross = 0.0;
  for (int n = 0; n <= k; ++n)
    for (int m = 0; m <= k; ++m)
      cross = std::max(cross, std::abs(gram(n, m) - mg(n, m)));
  report.checks.push_back(
      make_check("matrix_gram_agreement", cross, 1e-5, "max_abs"));

  report.tables["gram"] = gram_to_json(gram);
  report.tables["matrix_gram"] = gram_to_json(mg);
  report.table_csv = gram_to_csv(gram);
}

inline void run_evolve(const RunConfig& cfg, Report& report) {
  const ModelParams prm{cfg.A, cfg.B, cfg.cutoff};
  const ModelOperators ops = build_model(prm);
  const SpectralDecomposition eig = eig_general(ops.H);
  const FockState psi0 = n_particle_state_from(ops, eig, 1, 0);
  std::vector<double> t_grid;
  t_grid.reserve(size_t(cfg.t_steps) + 1);
  for (int k = 0; k <= cfg.t_steps; ++k)
    t_grid.push_back(cfg.t_max * double(k) / double(cfg.t_steps));
  const EvolveResult res = evolve_norms_from(ops, eig, psi0, t_grid);
  double drift = 0.0;
  const double base = std::abs(res.norms.front());
  for (double v : res.norms)
    drift = std::max(drift, std::abs(v - res.norms.front()) / base);
  report.checks.push_back(
      make_check("eta_norm_relative_drift", drift, 1e-8, "relative_drift"));
  report.checks.push_back(
      make_check("eta_norm_imag_part", res.max_imag, 1e-8, "max_abs"));
  report.tables["evolution"] = evolve_to_json(t_grid, res.norms);
  report.table_csv = evolve_to_csv(t_grid, res.norms);
}

inline void run_scaling(const RunConfig& cfg, Report& report) {
  const ModelParams base{cfg.A, cfg.B, cfg.cutoff};
  const ScalingReport sr = first_order_scaling_check(base, cfg.cutoff);
  for (const ScalingRow& row : sr.rows) {
    CheckRow check;
    check.name = "scaling_ratio_" + std::to_string(row.n1) + "_" +
                 std::to_string(row.n2);
    check.norm_type = "residual_ratio";
    check.deviation = row.ratio;
    check.tolerance = 200.0;  // accepted band is [50, 200] or both tiny
    check.pass = row.pass;
    report.checks.push_back(check);
  }
  report.tables["scaling"] = scaling_report_to_json(sr);
  report.table_csv = scaling_report_to_csv(sr);
}

}  // namespace detail

inline Report run(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  Report report;
  report.config_echo = cfg;
  switch (cfg.command) {
    case Command::Spectrum: detail::run_spectrum(cfg, report); break;
    case Command::NcSpectrum: detail::run_nc_spectrum(cfg, report); break;
    case Command::Verify: detail::run_verify(cfg, report); break;
    case Command::Quadrature: detail::run_quadrature(cfg, report); break;
    case Command::Evolve: detail::run_evolve(cfg, report); break;
    case Command::Scaling: detail::run_scaling(cfg, report); break;
    default: throw UsageError("a command is required");
  }
  const auto t1 = std::chrono::steady_clock::now();
  report.wallclock_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
  return report;
}

inline int write_output(const RunConfig& cfg, const std::string& body) {
  if (cfg.out_path.empty()) {
    std::cout << body;
    return 0;
  }
  std::ofstream out(cfg.out_path, std::ios::binary);
  if (!out) {
    std::cerr << "cannot open output file: " << cfg.out_path << "\n";
    return 3;
  }
  out << body;
  return out.good() ? 0 : 3;
}

// Exit codes: 0 all checks pass, 1 at least one check failed, 2 usage
// error, 3 numerical failure (defective spectrum, indefinite metric, ...).
inline int cli_main(const std::vector<std::string>& args) {
  RunConfig cfg;
  try {
    cfg = parse_args(args);
  } catch (const CLI::CallForHelp&) {
    std::cout << cli_help_text();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << cli_help_text();
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << cli_help_text();
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  Report report;
  try {
    report = run(cfg);
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidTruncationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DegreeLimitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NCGuardError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    report.config_echo = cfg;
    CheckRow row;
    row.name = std::string("error: ") + e.what();
    row.norm_type = "exception";
    row.deviation = std::numeric_limits<double>::quiet_NaN();
    row.tolerance = 0.0;
    row.pass = false;
    report.checks.push_back(row);
    const int io = write_output(cfg, render_report(report));
    return io != 0 ? io : 3;
  }

  const int io = write_output(cfg, render_report(report));
  if (io != 0) return io;
  return all_checks_pass(report) ? 0 : 1;
}

}  // namespace pseudoherm

#endif  // PSEUDOHERM_CLI_HPP
