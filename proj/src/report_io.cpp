#include "hck/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>

namespace hck {
namespace {

using nlohmann::json;

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json estimator_list(const std::vector<EstimatorKind>& kinds) {
  json out = json::array();
  for (EstimatorKind k : kinds) out.push_back(to_string(k));
  return out;
}

}  // namespace

std::string format_full(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_short(double v) {
  if (std::isnan(v)) return "NA";
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

json simulation_config_json(const SimulationSpec& spec, const SimulationOptions& options) {
  json model;
  model["name"] = to_string(spec.model);
  switch (spec.model) {
    case ModelKind::kModel1:
      model["n"] = spec.model1.n;
      model["k"] = spec.model1.k;
      model["beta"] = spec.model1.beta;
      model["hetero"] = spec.model1.hetero;
      model["dummy_threshold"] = spec.model1.dummy_threshold;
      break;
    case ModelKind::kPanel:
      model["units"] = spec.panel.units;
      model["periods"] = spec.panel.periods;
      model["beta"] = spec.panel.beta;
      model["hetero"] = spec.panel.hetero;
      break;
    case ModelKind::kPlm:
      model["n"] = spec.plm.n;
      model["order"] = spec.plm.order;
      model["dim_z"] = spec.plm.dim_z;
      model["g"] = to_string(spec.plm.g);
      model["beta"] = spec.plm.beta;
      break;
  }
  model["fixed_design"] = spec.fixed_design;

  json methods = json::array();
  for (IntervalMethod m : options.methods) methods.push_back(to_string(m));

  return json{{"model", model},
              {"replications", options.replications},
              {"estimators", estimator_list(options.estimators)},
              {"methods", methods},
              {"level", options.level},
              {"seed", options.seed},
              {"bootstrap_b", options.bootstrap_b}};
}

json simulation_to_json(const SimulationReport& report) {
  json results = json::array();
  for (const CoverageCell& cell : report.cells) {
    json reasons = json::object();
    for (const auto& [reason, count] : cell.failure_reasons) reasons[reason] = count;
    results.push_back({{"estimator", to_string(cell.kind)},
                       {"method", to_string(cell.method)},
                       {"coverage", number_or_null(cell.coverage)},
                       {"average_length", number_or_null(cell.average_length)},
                       {"successes", cell.successes},
                       {"covered", cell.covered},
                       {"failures", cell.failures},
                       {"failure_reasons", reasons}});
  }
  json diagnostics{{"beta_true", report.beta_true},
                   {"mean_mcal", number_or_null(report.mean_mcal)},
                   {"mean_k_effective", number_or_null(report.mean_k_effective)},
                   {"hck_infeasible_designs", report.hck_infeasible_designs},
                   {"fit_failures", report.fit_failures}};
  return json{{"version", kReportVersion},
              {"command", "simulate"},
              {"config_echo", simulation_config_json(report.spec, report.options)},
              {"results", results},
              {"diagnostics", diagnostics}};
}

std::string render_simulation_text(const SimulationReport& report) {
  std::ostringstream os;
  os << "model " << to_string(report.spec.model) << ", S=" << report.options.replications
     << ", level=" << format_short(report.options.level) << ", seed=" << report.options.seed
     << (report.spec.fixed_design ? ", fixed design" : "") << "\n";
  os << "mean K_effective=" << format_short(report.mean_k_effective)
     << ", mean mcal=" << format_short(report.mean_mcal)
     << ", HCK-infeasible designs=" << report.hck_infeasible_designs
     << ", fit failures=" << report.fit_failures << "\n";

  const auto& methods = report.options.methods;
  auto panel = [&](const char* title, auto value) {
    os << "\n" << title << "\n" << std::left << std::setw(10) << "estimator";
    for (IntervalMethod m : methods) os << std::right << std::setw(14) << to_string(m);
    for (IntervalMethod m : methods) os << std::right << std::setw(20) << (to_string(m) + " fails");
    os << "\n";
    for (EstimatorKind kind : report.options.estimators) {
      os << std::left << std::setw(10) << to_string(kind);
      for (IntervalMethod m : methods) {
        const CoverageCell* cell = report.find(kind, m);
        os << std::right << std::setw(14) << format_short(value(*cell));
      }
      for (IntervalMethod m : methods) {
        os << std::right << std::setw(20) << report.find(kind, m)->failures;
      }
      os << "\n";
    }
  };
  panel("(a) empirical coverage", [](const CoverageCell& c) { return c.coverage; });
  panel("(b) average interval length", [](const CoverageCell& c) { return c.average_length; });
  return os.str();
}

std::string render_simulation_csv(const SimulationReport& report) {
  std::ostringstream os;
  os << "estimator,method,coverage,average_length,successes,covered,failures\n";
  for (const CoverageCell& cell : report.cells) {
    os << to_string(cell.kind) << ',' << to_string(cell.method) << ','
       << format_full(cell.coverage) << ',' << format_full(cell.average_length) << ','
       << cell.successes << ',' << cell.covered << ',' << cell.failures << '\n';
  }
  return os.str();
}

}  // namespace hck
