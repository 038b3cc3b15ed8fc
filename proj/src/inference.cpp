#include "hck/inference.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hck/error.hpp"
#include "hck/parallel.hpp"
#include "hck/rng.hpp"

namespace hck {
namespace {

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorKind::kUsage, "confidence level must lie in (0, 1)");
  }
}

double coordinate_omega(const PartialledFit& fit, EstimatorKind kind, Index coord) {
  const MeatEstimate meat = compute_meat(fit, kind);
  return sandwich(fit, meat).omega_mat(coord, coord);
}

}  // namespace

std::string to_string(IntervalMethod method) {
  return method == IntervalMethod::kGaussian ? "gaussian" : "bootstrap";
}

std::optional<IntervalMethod> parse_method(std::string_view name) {
  if (name == "gaussian") return IntervalMethod::kGaussian;
  if (name == "bootstrap") return IntervalMethod::kBootstrap;
  return std::nullopt;
}

double t_statistic(double beta_hat, double beta_null, double omega, Index n) {
  if (!(omega > 0.0)) {
    std::ostringstream msg;
    msg << "negative variance estimate: Omega=" << omega;
    throw Error(ErrorKind::kNegativeVariance, msg.str());
  }
  return (beta_hat - beta_null) / std::sqrt(omega / static_cast<double>(n));
}

double two_sided_p_value(double t) { return 2.0 * normal_sf(std::fabs(t)); }

IntervalEstimate gaussian_ci(const Vector& beta_hat, const Matrix& omega, Index n, double level,
                             Index coord, EstimatorKind kind) {
  check_level(level);
  IntervalEstimate ci;
  ci.level = level;
  ci.kind = kind;
  ci.method = IntervalMethod::kGaussian;
  ci.estimate = beta_hat(coord);
  const double omega_cc = omega(coord, coord);
  if (!(omega_cc > 0.0)) {
    ci.failed = true;
    std::ostringstream msg;
    msg << "negative variance estimate (Omega=" << omega_cc << ")";
    ci.reason = msg.str();
    return ci;
  }
  ci.std_error = std::sqrt(omega_cc / static_cast<double>(n));
  const double alpha = 1.0 - level;
  const double q_hi = normal_quantile(1.0 - alpha / 2.0);
  const double q_lo = normal_quantile(alpha / 2.0);
  ci.lower = ci.estimate - q_hi * ci.std_error;
  ci.upper = ci.estimate - q_lo * ci.std_error;
  ci.length = (q_hi - q_lo) * ci.std_error;
  return ci;
}

double empirical_quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

IntervalEstimate bootstrap_ci(const RegressionData& data, const PartialledFit& fit,
                              EstimatorKind kind, Index replications, double level,
                              std::uint64_t seed, const BootstrapOptions& options) {
  check_level(level);
  if (replications < 100) throw Error(ErrorKind::kUsage, "bootstrap needs B >= 100");
  const Index coord = options.coord;
  const Index n = data.n();

  IntervalEstimate ci;
  ci.level = level;
  ci.kind = kind;
  ci.method = IntervalMethod::kBootstrap;
  ci.estimate = fit.beta_hat(coord);
  ci.resamples = replications;

  double omega_cc = 0.0;
  try {
    omega_cc = coordinate_omega(fit, kind, coord);
  } catch (const Error& e) {
    ci.failed = true;
    ci.reason = e.what();
    return ci;
  }
  if (!(omega_cc > 0.0)) {
    ci.failed = true;
    std::ostringstream msg;
    msg << "negative variance estimate (Omega=" << omega_cc << ")";
    ci.reason = msg.str();
    return ci;
  }
  ci.std_error = std::sqrt(omega_cc / static_cast<double>(n));

  constexpr double kFailed = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> t_star(static_cast<std::size_t>(replications), kFailed);
  parallel_for(static_cast<std::size_t>(replications), options.threads, [&](std::size_t b) {
    RandomStream rng(seed, streams::kBootstrap, b);
    RegressionData sample;
    sample.y.resize(n);
    sample.x.resize(n, data.d());
    sample.w.resize(n, data.k());
    for (Index i = 0; i < n; ++i) {
      const auto src = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
      sample.y(i) = data.y(src);
      sample.x.row(i) = data.x.row(src);
      sample.w.row(i) = data.w.row(src);
    }
    try {
      PruneResult pruned = prune_collinear(sample.w, options.fit.prune_tolerance);
      if (pruned.w.cols() != fit.k_effective) return;
      auto rep = std::make_shared<const AnnihilatorRep>(annihilator(pruned.w, options.fit.design));
      if (rep->k_effective != fit.k_effective) return;
      sample.w = std::move(pruned.w);
      const PartialledFit star = fit_partialled(sample, std::move(rep));
      const double omega_star = coordinate_omega(star, kind, coord);
      if (!(omega_star > 0.0)) return;
      t_star[b] = (star.beta_hat(coord) - fit.beta_hat(coord)) /
                  std::sqrt(omega_star / static_cast<double>(n));
    } catch (const Error&) {
      // Counted as a failed resample below.
    }
  });

  std::vector<double> ok;
  ok.reserve(t_star.size());
  for (double t : t_star) {
    if (std::isfinite(t)) ok.push_back(t);
  }
  ci.resample_failures = replications - static_cast<Index>(ok.size());
  if (static_cast<double>(ci.resample_failures) >
      options.max_failure_fraction * static_cast<double>(replications)) {
    ci.failed = true;
    std::ostringstream msg;
    msg << ci.resample_failures << " of " << replications << " bootstrap resamples failed";
    ci.reason = msg.str();
    return ci;
  }

  std::sort(ok.begin(), ok.end());
  const double alpha = 1.0 - level;
  const double q_hi = empirical_quantile_sorted(ok, 1.0 - alpha / 2.0);
  const double q_lo = empirical_quantile_sorted(ok, alpha / 2.0);
  ci.lower = ci.estimate - q_hi * ci.std_error;
  ci.upper = ci.estimate - q_lo * ci.std_error;
  ci.length = (q_hi - q_lo) * ci.std_error;
  return ci;
}

}  // namespace hck
