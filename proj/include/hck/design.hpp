#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace hck {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Outcome y (n), regressors of interest X (n x d) and nuisance covariates
// W (n x K). K may be zero.
struct RegressionData {
  Vector y;
  Matrix x;
  Matrix w;

  Index n() const { return y.size(); }
  Index d() const { return x.cols(); }
  Index k() const { return w.cols(); }

  // Throws ErrorKind::kData on shape mismatches, d == 0 or non-finite entries.
  void validate() const;
};

inline constexpr double kDefaultPruneTolerance = 1e-10;

struct PruneReport {
  std::vector<Index> dropped_columns;  // indices into the original W, ascending
  double threshold = kDefaultPruneTolerance;
};

struct PruneResult {
  Matrix w;  // retained columns, original order
  PruneReport report;
};

// Drops nuisance columns whose column-pivoted QR pivot falls to rel_tol times
// the largest pivot or below. Dropping every column is a valid (K = 0) result.
PruneResult prune_collinear(const Matrix& w, double rel_tol = kDefaultPruneTolerance);

struct DesignOptions {
  // Upper bound on the bytes of one dense n x n matrix (default: n = 20,000).
  std::uint64_t memory_cap_bytes = 20000ULL * 20000ULL * sizeof(double);
};

// Dense annihilator M = I - Q Q' of the nuisance design, with its diagonal and
// the maximal leverage mcal = 1 - min_i M_ii.
struct AnnihilatorRep {
  Matrix m;
  Vector diag;
  double mcal = 0.0;
  Index k_effective = 0;
  // Hash of the design that produced M; identifies reusable factorizations.
  std::uint64_t design_key = 0;

  Index n() const { return m.rows(); }
};

// Builds M from an orthonormal basis of span(W) obtained by column-pivoted
// Householder QR. W should already be pruned; any remaining rank deficiency is
// absorbed into k_effective. Throws ErrorKind::kTooLarge when n x n doubles
// exceed the memory cap.
AnnihilatorRep annihilator(const Matrix& w, const DesignOptions& options = {});

// HCK is declared infeasible once mcal comes within this margin of 1/2, where
// M (*) M is singular or numerically so (the Varah bound exceeds 1e10).
inline constexpr double kFeasibilityMargin = 1e-10;

inline bool hck_feasible(double mcal) { return mcal < 0.5 - kFeasibilityMargin; }

struct DiagnosticsSummary {
  Index n = 0;
  Index k_effective = 0;
  double k_over_n = 0.0;
  double mcal = 0.0;
  bool hck_feasible = false;
  // Bound on the max-row-sum norm of (M (*) M)^{-1}: 1 / (1/2 - mcal).
  double varah_bound = std::numeric_limits<double>::infinity();
};

DiagnosticsSummary leverage_diagnostics(const AnnihilatorRep& rep);

}  // namespace hck
