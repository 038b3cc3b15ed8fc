#include "hck/simulation.hpp"

#include <cmath>
#include <limits>

#include "hck/error.hpp"
#include "hck/parallel.hpp"

namespace hck {
namespace {

enum class Outcome : unsigned char { kCovered, kMissed, kFailed };

struct CellResult {
  Outcome outcome = Outcome::kFailed;
  double length = 0.0;
  std::string reason;
};

struct ReplicationResult {
  std::vector<CellResult> cells;
  double mcal = std::numeric_limits<double>::quiet_NaN();
  double k_effective = std::numeric_limits<double>::quiet_NaN();
  bool fit_failed = false;
};

SimulatedDesign draw_design(const SimulationSpec& spec, RandomStream& rng) {
  switch (spec.model) {
    case ModelKind::kModel1: return draw_model1_design(spec.model1, rng);
    case ModelKind::kPanel: return draw_panel_design(spec.panel, rng);
    case ModelKind::kPlm: return draw_plm_design(spec.plm, rng);
  }
  throw Error(ErrorKind::kUsage, "unknown model");
}

std::uint64_t bootstrap_seed(std::uint64_t seed, std::size_t replication) {
  return philox4x64({replication, 0, 0, 0}, {seed, streams::kBootstrap})[0];
}

// Pruned design shared by every replication of a fixed-design study.
struct FixedDesign {
  SimulatedDesign design;
  Matrix pruned_w;
  std::shared_ptr<const AnnihilatorRep> rep;
};

}  // namespace

std::string to_string(ModelKind model) {
  switch (model) {
    case ModelKind::kModel1: return "model1";
    case ModelKind::kPanel: return "panel";
    case ModelKind::kPlm: return "plm";
  }
  return "?";
}

std::optional<ModelKind> parse_model(std::string_view name) {
  for (ModelKind m : {ModelKind::kModel1, ModelKind::kPanel, ModelKind::kPlm}) {
    if (name == to_string(m)) return m;
  }
  return std::nullopt;
}

const CoverageCell* SimulationReport::find(EstimatorKind kind, IntervalMethod method) const {
  for (const auto& cell : cells) {
    if (cell.kind == kind && cell.method == method) return &cell;
  }
  return nullptr;
}

SimulationReport run_monte_carlo(const SimulationSpec& spec, const SimulationOptions& options) {
  if (options.replications < 1) throw Error(ErrorKind::kUsage, "simulation needs S >= 1");
  if (options.estimators.empty()) throw Error(ErrorKind::kUsage, "simulation needs an estimator");
  if (options.methods.empty()) throw Error(ErrorKind::kUsage, "simulation needs a method");
  if (!(options.level > 0.0 && options.level < 1.0)) {
    throw Error(ErrorKind::kUsage, "confidence level must lie in (0, 1)");
  }

  std::vector<CoverageCell> cells;
  for (EstimatorKind kind : options.estimators) {
    for (IntervalMethod method : options.methods) {
      CoverageCell cell;
      cell.kind = kind;
      cell.method = method;
      cells.push_back(cell);
    }
  }

  std::optional<FixedDesign> fixed;
  if (spec.fixed_design) {
    RandomStream rng(options.seed, streams::kFixedDesign, 0);
    FixedDesign fd;
    fd.design = draw_design(spec, rng);
    PruneResult pruned = prune_collinear(fd.design.w, options.fit.prune_tolerance);
    fd.rep = std::make_shared<const AnnihilatorRep>(annihilator(pruned.w, options.fit.design));
    fd.pruned_w = std::move(pruned.w);
    fixed = std::move(fd);
  }

  const auto total = static_cast<std::size_t>(options.replications);
  std::vector<ReplicationResult> results(total);

  parallel_for(total, options.threads, [&](std::size_t r) {
    ReplicationResult& out = results[r];
    out.cells.resize(cells.size());
    RandomStream rng(options.seed, streams::kReplication, r);

    std::optional<SimulatedDesign> local;
    if (!fixed) local = draw_design(spec, rng);
    const SimulatedDesign& design = fixed ? fixed->design : *local;
    RegressionData data = to_regression_data(design, draw_outcome(design, rng));

    std::optional<PartialledFit> fit;
    try {
      if (fixed) {
        RegressionData reduced{data.y, data.x, fixed->pruned_w};
        fit = fit_partialled(reduced, fixed->rep);
      } else {
        fit = fit_ols(data, options.fit).fit;
      }
    } catch (const Error& e) {
      out.fit_failed = true;
      for (auto& c : out.cells) c.reason = std::string("fit_") + to_string(e.kind());
      return;
    }
    out.mcal = fit->annihilator->mcal;
    out.k_effective = static_cast<double>(fit->k_effective);

    std::size_t c = 0;
    for (EstimatorKind kind : options.estimators) {
      std::optional<SandwichEstimate> omega;
      std::string omega_error;
      try {
        omega = sandwich(*fit, compute_meat(*fit, kind));
      } catch (const Error& e) {
        omega_error = to_string(e.kind());
      }
      for (IntervalMethod method : options.methods) {
        CellResult& cell = out.cells[c++];
        if (!omega) {
          cell.reason = omega_error;
          continue;
        }
        IntervalEstimate ci;
        if (method == IntervalMethod::kGaussian) {
          ci = gaussian_ci(fit->beta_hat, omega->omega_mat, fit->n, options.level, 0, kind);
          if (ci.failed) cell.reason = to_string(ErrorKind::kNegativeVariance);
        } else {
          BootstrapOptions bo;
          bo.threads = 1;
          bo.fit = options.fit;
          ci = bootstrap_ci(data, *fit, kind, options.bootstrap_b, options.level,
                            bootstrap_seed(options.seed, r), bo);
          if (ci.failed) cell.reason = "bootstrap_failed";
        }
        if (ci.failed) continue;
        cell.outcome = ci.covers(design.beta) ? Outcome::kCovered : Outcome::kMissed;
        cell.length = ci.length;
      }
    }
  });

  SimulationReport report;
  report.spec = spec;
  report.options = options;
  report.beta_true = fixed ? fixed->design.beta
                           : (spec.model == ModelKind::kModel1 ? spec.model1.beta
                              : spec.model == ModelKind::kPanel ? spec.panel.beta
                                                                : spec.plm.beta);

  double mcal_sum = 0.0;
  double k_sum = 0.0;
  Index fitted = 0;
  for (const ReplicationResult& rr : results) {
    if (rr.fit_failed) {
      ++report.fit_failures;
    } else {
      mcal_sum += rr.mcal;
      k_sum += rr.k_effective;
      ++fitted;
      if (!hck_feasible(rr.mcal)) ++report.hck_infeasible_designs;
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const CellResult& cr = rr.cells[c];
      CoverageCell& cell = cells[c];
      if (cr.outcome == Outcome::kFailed) {
        ++cell.failures;
        ++cell.failure_reasons[cr.reason];
        continue;
      }
      ++cell.successes;
      if (cr.outcome == Outcome::kCovered) ++cell.covered;
      cell.average_length += cr.length;
    }
  }
  for (CoverageCell& cell : cells) {
    if (cell.successes > 0) {
      cell.coverage = static_cast<double>(cell.covered) / static_cast<double>(cell.successes);
      cell.average_length /= static_cast<double>(cell.successes);
    } else {
      cell.coverage = std::numeric_limits<double>::quiet_NaN();
      cell.average_length = std::numeric_limits<double>::quiet_NaN();
    }
  }
  report.cells = std::move(cells);
  if (fitted > 0) {
    report.mean_mcal = mcal_sum / static_cast<double>(fitted);
    report.mean_k_effective = k_sum / static_cast<double>(fitted);
  }
  return report;
}

}  // namespace hck
