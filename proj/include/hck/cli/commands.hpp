#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hck/cli/csv.hpp"
#include "hck/simulation.hpp"

namespace hck::cli {

enum class OutputFormat { kText, kCsv, kJson };

std::string to_string(OutputFormat format);
std::optional<OutputFormat> parse_format(std::string_view name);

// Settings shared by regress and diagnose.
struct RegressConfig {
  std::string input;
  ColumnRoles roles;
  std::vector<EstimatorKind> estimators{kAllEstimators.begin(), kAllEstimators.end()};
  double level = 0.95;
  Index bootstrap_b = 0;  // 0: no bootstrap intervals
  std::uint64_t seed = 0;
  OutputFormat format = OutputFormat::kText;
  std::string out;             // empty: stdout
  double memory_cap_mb = 3200;  // one dense n x n matrix, 10^6 bytes per MB
  unsigned threads = 0;

  FitOptions fit_options() const;
};

struct EstimatorRow {
  EstimatorKind kind = EstimatorKind::kHC0;
  std::string coefficient;
  bool ok = false;
  std::string note;  // failure or warning text, empty when clean
  double estimate = 0.0;
  IntervalEstimate gaussian;
  double t = 0.0;
  double p_value = 0.0;
  std::optional<IntervalEstimate> bootstrap;
};

struct RegressDiagnostics {
  Index rows_read = 0;
  Index rows_dropped = 0;
  DiagnosticsSummary summary;
  Index d = 0;
  Index k_input = 0;
  std::vector<std::string> dropped_columns;
  // Leverage 1 - M_ii at probabilities 0, .25, .5, .75, .9, 1.
  std::vector<std::pair<double, double>> leverage_quantiles;
};

struct RegressReport {
  std::vector<EstimatorRow> rows;
  RegressDiagnostics diagnostics;
};

// prune -> annihilator -> fit -> estimators -> intervals. Estimator failures
// are recorded in their rows; identification failures throw.
RegressReport run_regress(const ParsedData& parsed, const RegressConfig& config);

// Design diagnostics without fitting.
RegressDiagnostics run_diagnose(const ParsedData& parsed, const RegressConfig& config);

nlohmann::json regress_to_json(const RegressReport& report, const RegressConfig& config);
std::string render_regress(const RegressReport& report, const RegressConfig& config);
nlohmann::json diagnose_to_json(const RegressDiagnostics& diag, const RegressConfig& config);
std::string render_diagnose(const RegressDiagnostics& diag, const RegressConfig& config);

struct SimulateConfig {
  SimulationSpec spec;
  SimulationOptions options;
  OutputFormat format = OutputFormat::kText;
  std::string out;
};

std::string render_simulate(const SimulationReport& report, OutputFormat format);

// Entry point: args exclude the program name. Writes reports to `out` (or
// --out) and diagnostics to `err`; returns the process exit code
// (0 success, 2 usage, 3 data, 4 numerical).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hck::cli
