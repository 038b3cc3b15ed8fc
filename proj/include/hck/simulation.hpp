#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hck/dgp.hpp"
#include "hck/inference.hpp"

namespace hck {

enum class ModelKind { kModel1, kPanel, kPlm };

std::string to_string(ModelKind model);
std::optional<ModelKind> parse_model(std::string_view name);

struct SimulationSpec {
  ModelKind model = ModelKind::kModel1;
  Model1Spec model1;
  PanelSpec panel;
  PlmSpec plm;
  // Draw X and W once and redraw only the errors in each replication.
  bool fixed_design = false;
};

struct SimulationOptions {
  Index replications = 1;
  std::vector<EstimatorKind> estimators{kAllEstimators.begin(), kAllEstimators.end()};
  std::vector<IntervalMethod> methods{IntervalMethod::kGaussian};
  double level = 0.95;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  Index bootstrap_b = 199;
  FitOptions fit;
};

// Aggregate for one estimator x method.
struct CoverageCell {
  EstimatorKind kind = EstimatorKind::kHC0;
  IntervalMethod method = IntervalMethod::kGaussian;
  Index successes = 0;
  Index covered = 0;
  Index failures = 0;
  // Over successful replications only; NaN when there are none.
  double coverage = 0.0;
  double average_length = 0.0;
  // Failure counts by reason category (ErrorKind name, or "fit").
  std::map<std::string, Index> failure_reasons;
};

struct SimulationReport {
  SimulationSpec spec;
  SimulationOptions options;
  double beta_true = 1.0;
  std::vector<CoverageCell> cells;
  // Design summaries over replications.
  double mean_mcal = 0.0;
  double mean_k_effective = 0.0;
  Index hck_infeasible_designs = 0;
  Index fit_failures = 0;

  const CoverageCell* find(EstimatorKind kind, IntervalMethod method) const;
};

// Monte Carlo coverage study. Replication r draws its data from the stream
// (seed, replication, r) (errors only when fixed_design), fits once and builds
// every requested interval. Estimator failures are recorded per cell and never
// abort the run. The report is identical for any thread count.
SimulationReport run_monte_carlo(const SimulationSpec& spec, const SimulationOptions& options);

}  // namespace hck
