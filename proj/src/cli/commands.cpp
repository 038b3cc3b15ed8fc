#include "hck/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hck/cli/config.hpp"
#include "hck/error.hpp"
#include "hck/report_io.hpp"

namespace hck::cli {
namespace {

using nlohmann::json;

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::vector<EstimatorKind> parse_estimator_list(const std::string& list) {
  std::vector<EstimatorKind> out;
  for (const auto& name : split_list(list)) {
    if (name == "all" || name == "ALL") {
      out.assign(kAllEstimators.begin(), kAllEstimators.end());
      continue;
    }
    const auto kind = parse_estimator(name);
    if (!kind) throw Error(ErrorKind::kUsage, "unknown estimator '" + name + "'");
    if (std::find(out.begin(), out.end(), *kind) == out.end()) out.push_back(*kind);
  }
  if (out.empty()) throw Error(ErrorKind::kUsage, "--estimators lists no estimator");
  return out;
}

std::vector<IntervalMethod> parse_method_list(const std::string& list) {
  std::vector<IntervalMethod> out;
  for (const auto& name : split_list(list)) {
    const auto method = parse_method(name);
    if (!method) throw Error(ErrorKind::kUsage, "unknown interval method '" + name + "'");
    if (std::find(out.begin(), out.end(), *method) == out.end()) out.push_back(*method);
  }
  if (out.empty()) throw Error(ErrorKind::kUsage, "--methods lists no method");
  return out;
}

OutputFormat require_format(const std::string& name) {
  const auto f = parse_format(name);
  if (!f) throw Error(ErrorKind::kUsage, "unknown format '" + name + "' (text, csv, json)");
  return *f;
}

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorKind::kUsage, "--level must lie in (0, 1)");
}

std::string failure_note(const Error& e, const PartialledFit& fit) {
  if (e.kind() == ErrorKind::kInfeasible) {
    return "infeasible (Mcal=" + format_short(fit.annihilator->mcal) + ")";
  }
  return std::string(to_string(e.kind())) + ": " + e.what();
}

json strings(const std::vector<std::string>& v) { return json(v); }

json regress_config_json(const RegressConfig& c) {
  json estimators = json::array();
  for (EstimatorKind k : c.estimators) estimators.push_back(to_string(k));
  return json{{"input", c.input},
              {"y", c.roles.y},
              {"x", strings(c.roles.x)},
              {"w", strings(c.roles.w)},
              {"factors", strings(c.roles.factors)},
              {"interactions", strings(c.roles.interactions)},
              {"intercept", c.roles.intercept},
              {"estimators", estimators},
              {"level", c.level},
              {"bootstrap_b", c.bootstrap_b},
              {"seed", c.seed},
              {"memory_cap_mb", c.memory_cap_mb}};
}

json diagnostics_json(const RegressDiagnostics& d) {
  json quantiles = json::array();
  for (const auto& [p, q] : d.leverage_quantiles) quantiles.push_back({{"p", p}, {"leverage", q}});
  return json{{"n", d.summary.n},
              {"d", d.d},
              {"k_input", d.k_input},
              {"k_effective", d.summary.k_effective},
              {"k_over_n", d.summary.k_over_n},
              {"mcal", d.summary.mcal},
              {"hck_feasible", d.summary.hck_feasible},
              {"varah_bound", number_or_null(d.summary.varah_bound)},
              {"dropped_columns", strings(d.dropped_columns)},
              {"rows_read", d.rows_read},
              {"rows_dropped", d.rows_dropped},
              {"leverage_quantiles", quantiles}};
}

std::string diagnostics_text(const RegressDiagnostics& d) {
  std::ostringstream os;
  const auto& s = d.summary;
  os << "n=" << s.n << "  d=" << d.d << "  K=" << d.k_input << "  K_effective=" << s.k_effective
     << "  K/n=" << format_short(s.k_over_n) << "\n";
  os << "Mcal=" << format_short(s.mcal) << "  HCK "
     << (s.hck_feasible ? "feasible" : "infeasible (Mcal >= 1/2)")
     << "  Varah bound=" << format_short(s.varah_bound) << "\n";
  os << "dropped columns: ";
  if (d.dropped_columns.empty()) os << "none";
  for (std::size_t i = 0; i < d.dropped_columns.size(); ++i) {
    os << (i ? ", " : "") << d.dropped_columns[i];
  }
  os << "\nrows read=" << d.rows_read << "  dropped for missing values=" << d.rows_dropped << "\n";
  return os.str();
}

RegressDiagnostics diagnostics_for(const ParsedData& parsed, const PruneReport& prune,
                                   const AnnihilatorRep& rep) {
  RegressDiagnostics d;
  d.rows_read = parsed.rows_read;
  d.rows_dropped = parsed.rows_dropped;
  d.summary = leverage_diagnostics(rep);
  d.d = parsed.data.d();
  d.k_input = parsed.data.k();
  for (Index j : prune.dropped_columns) {
    d.dropped_columns.push_back(parsed.w_names[static_cast<std::size_t>(j)]);
  }
  std::vector<double> leverage(static_cast<std::size_t>(rep.n()));
  for (Index i = 0; i < rep.n(); ++i) leverage[static_cast<std::size_t>(i)] = 1.0 - rep.diag(i);
  std::sort(leverage.begin(), leverage.end());
  for (double p : {0.0, 0.25, 0.5, 0.75, 0.9, 1.0}) {
    d.leverage_quantiles.emplace_back(p, empirical_quantile_sorted(leverage, p));
  }
  return d;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::kData, "cannot open output file '" + path + "'");
  f << text;
  if (!f) throw Error(ErrorKind::kData, "failed writing output file '" + path + "'");
}

// Raw option values; validated into configs after parsing.
struct RegressFlags {
  std::string input, y, x, w, factor, interact, estimators = "all", format = "text", out;
  bool intercept = false;
  double level = 0.95;
  Index bootstrap_b = 0;
  std::uint64_t seed = 0;
  double memory_cap = 3200;
  unsigned threads = 0;
};

struct SimulateFlags {
  std::string model = "model1", estimators = "all", methods = "gaussian", g = "sine",
              format = "text", out;
  Index n = -1, k = 1, s = 1000, units = 100, periods = 3, order = 3, dim_z = 10;
  Index bootstrap_b = 199;
  double beta = 1.0, level = 0.95, memory_cap = 3200;
  bool hetero = false, fixed_design = false;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

void add_regress_flags(CLI::App* cmd, RegressFlags& f, bool with_estimators) {
  cmd->add_option("--input", f.input, "CSV file with a header row")->required();
  cmd->add_option("--y", f.y, "outcome column")->required();
  cmd->add_option("--x", f.x, "regressors of interest, comma separated")->required();
  cmd->add_option("--w", f.w, "numeric nuisance columns, comma separated");
  cmd->add_option("--factor", f.factor, "factor columns expanded to dummies, comma separated");
  cmd->add_option("--interact", f.interact, "factor interactions a:b, comma separated");
  cmd->add_flag("--intercept", f.intercept, "add a column of ones to the nuisance design");
  cmd->add_option("--format", f.format, "text, csv or json");
  cmd->add_option("--out", f.out, "write the report here instead of stdout");
  cmd->add_option("--memory-cap", f.memory_cap, "cap on one dense n x n matrix, in MB");
  if (with_estimators) {
    cmd->add_option("--estimators", f.estimators, "comma separated, e.g. hck,hc3,hc0 (default all)");
    cmd->add_option("--level", f.level, "confidence level");
    cmd->add_option("--bootstrap-b", f.bootstrap_b, "percentile-t bootstrap replications (0: off)");
    cmd->add_option("--seed", f.seed, "bootstrap seed");
    cmd->add_option("--threads", f.threads, "worker threads (0: all cores)");
  }
}

RegressConfig to_config(const RegressFlags& f) {
  RegressConfig c;
  c.input = f.input;
  c.roles.y = f.y;
  c.roles.x = split_list(f.x);
  c.roles.w = split_list(f.w);
  c.roles.factors = split_list(f.factor);
  c.roles.interactions = split_list(f.interact);
  c.roles.intercept = f.intercept;
  c.estimators = parse_estimator_list(f.estimators);
  check_level(f.level);
  c.level = f.level;
  if (f.bootstrap_b != 0 && f.bootstrap_b < 100) {
    throw Error(ErrorKind::kUsage, "--bootstrap-b must be 0 or at least 100");
  }
  c.bootstrap_b = f.bootstrap_b;
  c.seed = f.seed;
  c.format = require_format(f.format);
  c.out = f.out;
  if (!(f.memory_cap > 0.0)) throw Error(ErrorKind::kUsage, "--memory-cap must be positive");
  c.memory_cap_mb = f.memory_cap;
  c.threads = f.threads;
  return c;
}

SimulateConfig to_config(const SimulateFlags& f) {
  SimulateConfig c;
  const auto model = parse_model(f.model);
  if (!model) throw Error(ErrorKind::kUsage, "unknown model '" + f.model + "' (model1, panel, plm)");
  c.spec.model = *model;
  c.spec.fixed_design = f.fixed_design;

  c.spec.model1.n = f.n < 0 ? 700 : f.n;
  c.spec.model1.k = f.k;
  c.spec.model1.beta = f.beta;
  c.spec.model1.hetero = f.hetero;
  c.spec.panel.units = f.units;
  c.spec.panel.periods = f.periods;
  c.spec.panel.beta = f.beta;
  c.spec.panel.hetero = f.hetero;
  c.spec.plm.n = f.n < 0 ? 1000 : f.n;
  c.spec.plm.order = f.order;
  c.spec.plm.dim_z = f.dim_z;
  c.spec.plm.beta = f.beta;
  const auto g = parse_smooth_function(f.g);
  if (!g) throw Error(ErrorKind::kUsage, "unknown smooth function '" + f.g + "'");
  c.spec.plm.g = *g;

  if (f.s < 1) throw Error(ErrorKind::kUsage, "--s must be at least 1");
  c.options.replications = f.s;
  c.options.estimators = parse_estimator_list(f.estimators);
  c.options.methods = parse_method_list(f.methods);
  check_level(f.level);
  c.options.level = f.level;
  c.options.seed = f.seed;
  c.options.threads = f.threads;
  c.options.bootstrap_b = f.bootstrap_b;
  if (std::find(c.options.methods.begin(), c.options.methods.end(), IntervalMethod::kBootstrap) !=
          c.options.methods.end() &&
      f.bootstrap_b < 100) {
    throw Error(ErrorKind::kUsage, "--bootstrap-b must be at least 100");
  }
  if (!(f.memory_cap > 0.0)) throw Error(ErrorKind::kUsage, "--memory-cap must be positive");
  c.options.fit.design.memory_cap_bytes = static_cast<std::uint64_t>(f.memory_cap * 1e6);
  c.format = require_format(f.format);
  c.out = f.out;
  return c;
}

}  // namespace

std::string to_string(OutputFormat format) {
  switch (format) {
    case OutputFormat::kText: return "text";
    case OutputFormat::kCsv: return "csv";
    case OutputFormat::kJson: return "json";
  }
  return "?";
}

std::optional<OutputFormat> parse_format(std::string_view name) {
  for (OutputFormat f : {OutputFormat::kText, OutputFormat::kCsv, OutputFormat::kJson}) {
    if (name == to_string(f)) return f;
  }
  return std::nullopt;
}

FitOptions RegressConfig::fit_options() const {
  FitOptions opts;
  opts.design.memory_cap_bytes = static_cast<std::uint64_t>(memory_cap_mb * 1e6);
  return opts;
}

RegressReport run_regress(const ParsedData& parsed, const RegressConfig& config) {
  parsed.data.validate();
  check_level(config.level);
  const FitOptions fit_opts = config.fit_options();
  const PreparedFit prepared = fit_ols(parsed.data, fit_opts);
  const PartialledFit& fit = prepared.fit;

  RegressReport report;
  report.diagnostics = diagnostics_for(parsed, prepared.prune, *fit.annihilator);

  for (EstimatorKind kind : config.estimators) {
    std::optional<SandwichEstimate> omega;
    std::string note;
    try {
      const MeatEstimate meat = compute_meat(fit, kind);
      omega = sandwich(fit, meat);
      if (!meat.psd) note = "meat not positive semidefinite";
      if (meat.aux.negative_u_tilde > 0) {
        note = std::to_string(meat.aux.negative_u_tilde) + " negative bias-corrected squared residuals";
      }
    } catch (const Error& e) {
      note = failure_note(e, fit);
    }
    for (Index j = 0; j < fit.d; ++j) {
      EstimatorRow row;
      row.kind = kind;
      row.coefficient = parsed.x_names[static_cast<std::size_t>(j)];
      row.estimate = fit.beta_hat(j);
      row.note = note;
      row.gaussian.kind = kind;
      row.gaussian.level = config.level;
      row.gaussian.estimate = fit.beta_hat(j);
      row.t = row.p_value = std::numeric_limits<double>::quiet_NaN();
      if (omega) {
        row.gaussian = gaussian_ci(fit.beta_hat, omega->omega_mat, fit.n, config.level, j, kind);
        if (row.gaussian.failed) {
          row.note = "negative variance estimate";
        } else {
          row.ok = true;
          row.t = t_statistic(fit.beta_hat(j), 0.0, omega->omega_mat(j, j), fit.n);
          row.p_value = two_sided_p_value(row.t);
          if (config.bootstrap_b > 0) {
            BootstrapOptions bo;
            bo.coord = j;
            bo.threads = config.threads;
            bo.fit = fit_opts;
            row.bootstrap = bootstrap_ci(parsed.data, fit, kind, config.bootstrap_b, config.level,
                                         config.seed, bo);
          }
        }
      }
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

RegressDiagnostics run_diagnose(const ParsedData& parsed, const RegressConfig& config) {
  parsed.data.validate();
  const FitOptions opts = config.fit_options();
  const PruneResult pruned = prune_collinear(parsed.data.w, opts.prune_tolerance);
  const AnnihilatorRep rep = annihilator(pruned.w, opts.design);
  return diagnostics_for(parsed, pruned.report, rep);
}

json regress_to_json(const RegressReport& report, const RegressConfig& config) {
  json results = json::array();
  for (const EstimatorRow& row : report.rows) {
    json boot = nullptr;
    if (row.bootstrap) {
      const auto& b = *row.bootstrap;
      boot = json{{"ci_lower", number_or_null(b.lower)},
                  {"ci_upper", number_or_null(b.upper)},
                  {"resamples", b.resamples},
                  {"resample_failures", b.resample_failures},
                  {"failed", b.failed},
                  {"reason", b.reason}};
    }
    results.push_back({{"estimator", to_string(row.kind)},
                       {"coefficient", row.coefficient},
                       {"ok", row.ok},
                       {"note", row.note},
                       {"estimate", number_or_null(row.estimate)},
                       {"std_error", number_or_null(row.gaussian.std_error)},
                       {"t", number_or_null(row.t)},
                       {"p_value", number_or_null(row.p_value)},
                       {"ci_lower", number_or_null(row.gaussian.lower)},
                       {"ci_upper", number_or_null(row.gaussian.upper)},
                       {"bootstrap", boot}});
  }
  return json{{"version", kReportVersion},
              {"command", "regress"},
              {"config_echo", regress_config_json(config)},
              {"results", results},
              {"diagnostics", diagnostics_json(report.diagnostics)}};
}

std::string render_regress(const RegressReport& report, const RegressConfig& config) {
  if (config.format == OutputFormat::kJson) return regress_to_json(report, config).dump(2) + "\n";
  std::ostringstream os;
  const bool boot = config.bootstrap_b > 0;
  if (config.format == OutputFormat::kCsv) {
    os << "estimator,coefficient,estimate,std_error,t,p_value,ci_lower,ci_upper";
    if (boot) os << ",boot_lower,boot_upper";
    os << ",note\n";
    for (const EstimatorRow& r : report.rows) {
      os << to_string(r.kind) << ',' << r.coefficient << ',' << format_full(r.estimate) << ','
         << format_full(r.gaussian.std_error) << ',' << format_full(r.t) << ','
         << format_full(r.p_value) << ',' << format_full(r.gaussian.lower) << ','
         << format_full(r.gaussian.upper);
      if (boot) {
        const double lo = r.bootstrap ? r.bootstrap->lower : std::nan("");
        const double hi = r.bootstrap ? r.bootstrap->upper : std::nan("");
        os << ',' << format_full(lo) << ',' << format_full(hi);
      }
      std::string note = r.note;
      std::replace(note.begin(), note.end(), '"', '\'');
      os << ",\"" << note << "\"\n";
    }
    return os.str();
  }

  os << diagnostics_text(report.diagnostics) << "\n";
  os << std::left << std::setw(10) << "estimator" << std::setw(14) << "coefficient" << std::right
     << std::setw(13) << "estimate" << std::setw(13) << "std.error" << std::setw(13) << "t"
     << std::setw(13) << "p-value" << std::setw(13) << "ci.lower" << std::setw(13) << "ci.upper";
  if (boot) os << std::setw(13) << "boot.lower" << std::setw(13) << "boot.upper";
  os << "  note\n";
  for (const EstimatorRow& r : report.rows) {
    os << std::left << std::setw(10) << to_string(r.kind) << std::setw(14) << r.coefficient
       << std::right << std::setw(13) << format_short(r.estimate);
    if (r.ok) {
      os << std::setw(13) << format_short(r.gaussian.std_error) << std::setw(13)
         << format_short(r.t) << std::setw(13) << format_short(r.p_value) << std::setw(13)
         << format_short(r.gaussian.lower) << std::setw(13) << format_short(r.gaussian.upper);
    } else {
      for (int i = 0; i < 5; ++i) os << std::setw(13) << "-";
    }
    if (boot) {
      if (r.bootstrap && !r.bootstrap->failed) {
        os << std::setw(13) << format_short(r.bootstrap->lower) << std::setw(13)
           << format_short(r.bootstrap->upper);
      } else {
        os << std::setw(13) << "-" << std::setw(13) << "-";
      }
    }
    std::string note = r.note;
    if (r.bootstrap && r.bootstrap->failed) {
      note += (note.empty() ? "" : "; ") + std::string("bootstrap failed: ") + r.bootstrap->reason;
    }
    os << "  " << note << "\n";
  }
  return os.str();
}

json diagnose_to_json(const RegressDiagnostics& diag, const RegressConfig& config) {
  return json{{"version", kReportVersion},
              {"command", "diagnose"},
              {"config_echo", regress_config_json(config)},
              {"results", json::array()},
              {"diagnostics", diagnostics_json(diag)}};
}

std::string render_diagnose(const RegressDiagnostics& diag, const RegressConfig& config) {
  if (config.format == OutputFormat::kJson) return diagnose_to_json(diag, config).dump(2) + "\n";
  std::ostringstream os;
  if (config.format == OutputFormat::kCsv) {
    const auto& s = diag.summary;
    os << "key,value\n"
       << "n," << s.n << "\nd," << diag.d << "\nk_input," << diag.k_input << "\nk_effective,"
       << s.k_effective << "\nk_over_n," << format_full(s.k_over_n) << "\nmcal,"
       << format_full(s.mcal) << "\nhck_feasible," << (s.hck_feasible ? "true" : "false")
       << "\nvarah_bound," << format_full(s.varah_bound) << "\n";
    for (const auto& [p, q] : diag.leverage_quantiles) {
      os << "leverage_q" << format_short(p) << ',' << format_full(q) << "\n";
    }
    return os.str();
  }
  os << diagnostics_text(diag) << "leverage quantiles:";
  for (const auto& [p, q] : diag.leverage_quantiles) {
    os << "  q" << format_short(p) << "=" << format_short(q);
  }
  os << "\n";
  return os.str();
}

std::string render_simulate(const SimulationReport& report, OutputFormat format) {
  switch (format) {
    case OutputFormat::kJson: return simulation_to_json(report).dump(2) + "\n";
    case OutputFormat::kCsv: return render_simulation_csv(report);
    case OutputFormat::kText: break;
  }
  return render_simulation_text(report);
}

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"OLS inference with many nuisance covariates", "hck"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_version_flag("--version", "hck 1.0.0");

  RegressFlags regress_flags, diagnose_flags;
  SimulateFlags sim;

  CLI::App* regress = app.add_subcommand("regress", "fit a regression and report every estimator");
  CLI::App* diagnose = app.add_subcommand("diagnose", "leverage and HCK feasibility diagnostics");
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo coverage study");
  for (CLI::App* sub : {regress, diagnose, simulate}) {
    sub->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    // Documented here; consumed before parsing by expand_config.
    sub->add_option("--config", "flat key=value file mirroring the flags; flags win");
  }
  add_regress_flags(regress, regress_flags, true);
  add_regress_flags(diagnose, diagnose_flags, false);

  simulate->add_option("--model", sim.model, "model1, panel or plm");
  simulate->add_option("--n", sim.n, "sample size (model1, plm)");
  simulate->add_option("--k", sim.k, "number of dummies (model1)");
  simulate->add_option("--s", sim.s, "replications");
  simulate->add_option("--seed", sim.seed, "master seed");
  simulate->add_flag("--hetero", sim.hetero, "heteroskedastic errors (model1, panel)");
  simulate->add_option("--beta", sim.beta, "true coefficient");
  simulate->add_option("--units", sim.units, "panel units");
  simulate->add_option("--periods", sim.periods, "panel periods");
  simulate->add_option("--order", sim.order, "power series order (plm)");
  simulate->add_option("--dim-z", sim.dim_z, "dimension of z (plm)");
  simulate->add_option("--g", sim.g, "smooth function: linear, sine or exp (plm)");
  simulate->add_option("--estimators", sim.estimators, "comma separated (default all)");
  simulate->add_option("--methods", sim.methods, "gaussian, bootstrap");
  simulate->add_option("--level", sim.level, "confidence level");
  simulate->add_option("--bootstrap-b", sim.bootstrap_b, "bootstrap replications");
  simulate->add_option("--threads", sim.threads, "worker threads (0: all cores)");
  simulate->add_flag("--fixed-design", sim.fixed_design, "draw X and W once");
  simulate->add_option("--format", sim.format, "text, csv or json");
  simulate->add_option("--out", sim.out, "write the report here instead of stdout");
  simulate->add_option("--memory-cap", sim.memory_cap, "cap on one dense n x n matrix, in MB");

  try {
    std::vector<std::string> args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    try {
      app.parse(args);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? 0 : exit_code_for(ErrorKind::kUsage);
    }

    if (regress->parsed()) {
      const RegressConfig config = to_config(regress_flags);
      const ParsedData parsed = parse_csv(config.input, config.roles);
      emit(render_regress(run_regress(parsed, config), config), config.out, out);
    } else if (diagnose->parsed()) {
      const RegressConfig config = to_config(diagnose_flags);
      const ParsedData parsed = parse_csv(config.input, config.roles);
      emit(render_diagnose(run_diagnose(parsed, config), config), config.out, out);
    } else {
      const SimulateConfig config = to_config(sim);
      emit(render_simulate(run_monte_carlo(config.spec, config.options), config.format), config.out,
           out);
    }
    return 0;
  } catch (const Error& e) {
    err << "error[" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error[internal]: " << e.what() << "\n";
    return exit_code_for(ErrorKind::kNumerical);
  }
}

}  // namespace hck::cli
