#pragma once

#include <cstdint>
#include <limits>
#include <string>

#include "hck/normal.hpp"
#include "hck/variance.hpp"

namespace hck {

enum class IntervalMethod { kGaussian, kBootstrap };

std::string to_string(IntervalMethod method);
std::optional<IntervalMethod> parse_method(std::string_view name);

struct IntervalEstimate {
  double lower = std::numeric_limits<double>::quiet_NaN();
  double upper = std::numeric_limits<double>::quiet_NaN();
  double level = 0.95;
  double length = std::numeric_limits<double>::quiet_NaN();
  EstimatorKind kind = EstimatorKind::kHC0;
  IntervalMethod method = IntervalMethod::kGaussian;
  bool failed = false;
  std::string reason;
  // Point estimate and standard error sqrt(Omega_cc / n) the interval is built on.
  double estimate = std::numeric_limits<double>::quiet_NaN();
  double std_error = std::numeric_limits<double>::quiet_NaN();
  // Bootstrap only.
  Index resamples = 0;
  Index resample_failures = 0;

  bool covers(double value) const { return !failed && lower <= value && value <= upper; }
};

// (beta_hat - beta_null) / sqrt(omega / n). Throws kNegativeVariance when
// omega <= 0.
double t_statistic(double beta_hat, double beta_null, double omega, Index n);

// Two-sided p-value of a standard normal statistic.
double two_sided_p_value(double t);

// [b - q(1 - a/2) se, b - q(a/2) se] with se = sqrt(Omega_cc / n) and normal
// quantiles q. A non-positive Omega_cc yields a failed interval.
IntervalEstimate gaussian_ci(const Vector& beta_hat, const Matrix& omega, Index n, double level,
                             Index coord, EstimatorKind kind = EstimatorKind::kHC0);

// Type-7 (linear interpolation) empirical quantile of sorted values.
double empirical_quantile_sorted(const std::vector<double>& sorted, double p);

struct BootstrapOptions {
  Index coord = 0;
  unsigned threads = 1;
  FitOptions fit;
  // More failed resamples than this fraction of B fails the interval.
  double max_failure_fraction = 0.10;
};

// Percentile-t pairs bootstrap: resamples rows (y_i, x_i, w_i) with
// replacement, recomputes T* = (b* - b) / sqrt(Omega* / n), and replaces the
// normal quantiles by type-7 empirical quantiles of T*. Resamples whose pruned
// K differs from the original, or whose estimator fails, count as failures.
// Results depend only on (data, kind, B, level, seed), not on thread count.
IntervalEstimate bootstrap_ci(const RegressionData& data, const PartialledFit& fit,
                              EstimatorKind kind, Index replications, double level,
                              std::uint64_t seed, const BootstrapOptions& options = {});

}  // namespace hck
