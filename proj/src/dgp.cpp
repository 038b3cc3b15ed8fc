#include "hck/dgp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "hck/error.hpp"
#include "hck/normal.hpp"

namespace hck {
namespace {

__extension__ typedef unsigned __int128 u128;


constexpr std::uint64_t kCalibrationSeed = 0x5EEDCA1B7A7E0001ULL;

// Cumulative Binomial(k, p) probabilities, cdf[j] = P(S <= j).
std::vector<double> binomial_cdf(Index k, double p) {
  std::vector<double> cdf(static_cast<std::size_t>(k) + 1, 0.0);
  if (p >= 1.0) {
    cdf.back() = 1.0;
    return cdf;
  }
  double pmf = std::pow(1.0 - p, static_cast<double>(k));
  double acc = 0.0;
  for (Index j = 0; j <= k; ++j) {
    acc += pmf;
    cdf[static_cast<std::size_t>(j)] = acc;
    pmf *= static_cast<double>(k - j) / static_cast<double>(j + 1) * p / (1.0 - p);
  }
  cdf.back() = 1.0;
  return cdf;
}

double binomial_inverse(const std::vector<double>& cdf, double u) {
  const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
  return static_cast<double>(std::min<std::ptrdiff_t>(it - cdf.begin(),
                                                      static_cast<std::ptrdiff_t>(cdf.size()) - 1));
}

struct MeanAccumulator {
  double sum = 0.0;
  double sum_sq = 0.0;
  Index count = 0;

  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++count;
  }
  double mean() const { return sum / static_cast<double>(count); }
  double rel_se() const {
    const double m = mean();
    const double var = std::max(0.0, sum_sq / static_cast<double>(count) - m * m);
    return std::sqrt(var / static_cast<double>(count)) / m;
  }
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::kUsage, what);
}

double smooth(SmoothFunction f, const double* z, Index dim) {
  double acc = 0.0;
  switch (f) {
    case SmoothFunction::kLinear:
      for (Index k = 0; k < dim; ++k) acc += z[k];
      return acc / std::sqrt(static_cast<double>(dim));
    case SmoothFunction::kSine:
      for (Index k = 0; k < dim; ++k) acc += std::sin(std::numbers::pi * z[k]);
      return acc / std::sqrt(static_cast<double>(dim));
    case SmoothFunction::kExponential:
      for (Index k = 0; k < dim; ++k) acc += z[k];
      return std::exp(acc / static_cast<double>(dim));
  }
  return 0.0;
}

// Exponent vectors of all monomials of total degree <= order, graded.
std::vector<std::vector<int>> monomial_exponents(Index order, Index dim) {
  std::vector<std::vector<int>> out;
  std::vector<int> current(static_cast<std::size_t>(dim), 0);
  // Fill positions left to right with the remaining degree budget.
  auto rec = [&](auto&& self, Index pos, Index remaining) -> void {
    if (pos == dim) {
      if (remaining == 0) out.push_back(current);
      return;
    }
    for (Index e = remaining; e >= 0; --e) {
      current[static_cast<std::size_t>(pos)] = static_cast<int>(e);
      self(self, pos + 1, remaining - e);
    }
    current[static_cast<std::size_t>(pos)] = 0;
  };
  for (Index degree = 0; degree <= order; ++degree) rec(rec, 0, degree);
  return out;
}

}  // namespace

double hetero_trim(double a) { return std::clamp(a, -2.0, 2.0); }

std::string to_string(SmoothFunction f) {
  switch (f) {
    case SmoothFunction::kLinear: return "linear";
    case SmoothFunction::kSine: return "sine";
    case SmoothFunction::kExponential: return "exp";
  }
  return "?";
}

std::optional<SmoothFunction> parse_smooth_function(std::string_view name) {
  for (SmoothFunction f : {SmoothFunction::kLinear, SmoothFunction::kSine,
                           SmoothFunction::kExponential}) {
    if (name == to_string(f)) return f;
  }
  return std::nullopt;
}

Index power_series_dimension(Index order, Index dim_z) {
  if (order < 0 || dim_z < 0) return 0;
  const Index small = std::min(order, dim_z);
  const Index large = std::max(order, dim_z);
  u128 r = 1;
  constexpr auto kMax = static_cast<u128>(std::numeric_limits<Index>::max());
  for (Index i = 1; i <= small; ++i) {
    r = r * static_cast<u128>(large + i) / static_cast<u128>(i);
    if (r > kMax) return std::numeric_limits<Index>::max();
  }
  return static_cast<Index>(r);
}

VarianceConstants calibrate_variance_constants(const Model1Spec& spec, Index draws) {
  require(spec.k >= 0, "calibration: K must be non-negative");
  require(std::isfinite(spec.dummy_threshold), "calibration: threshold must be finite");
  require(draws > 1, "calibration: need at least two draws");

  using Key = std::tuple<Index, double, Index>;
  static std::mutex memo_mutex;
  static std::map<Key, VarianceConstants> memo;
  const Key key{spec.k, spec.dummy_threshold, draws};
  {
    std::lock_guard lock(memo_mutex);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
  }

  const std::vector<double> cdf = binomial_cdf(spec.k, normal_sf(spec.dummy_threshold));

  MeanAccumulator v_acc;
  RandomStream v_rng(kCalibrationSeed, streams::kCalibration, 0);
  for (Index j = 0; j < draws; ++j) {
    const double s = binomial_inverse(cdf, v_rng.uniform());
    v_acc.add(1.0 + s * s);
  }
  VarianceConstants out;
  out.kappa_v = 1.0 / v_acc.mean();
  out.rel_se_v = v_acc.rel_se();

  MeanAccumulator u_acc;
  RandomStream u_rng(kCalibrationSeed, streams::kCalibration, 1);
  for (Index j = 0; j < draws; ++j) {
    const double s = binomial_inverse(cdf, u_rng.uniform());
    const double x = std::sqrt(out.kappa_v * (1.0 + s * s)) * u_rng.normal();
    const double shift = hetero_trim(x) + s;
    u_acc.add(1.0 + shift * shift);
  }
  out.kappa_u = 1.0 / u_acc.mean();
  out.rel_se_u = u_acc.rel_se();

  std::lock_guard lock(memo_mutex);
  memo.emplace(key, out);
  return out;
}

SimulatedDesign draw_model1_design(const Model1Spec& spec, RandomStream& rng) {
  require(spec.n > 0 && spec.k >= 0, "model1: n must be positive and K non-negative");
  require(spec.k < spec.n, "model1: K must be below n");
  require(std::isfinite(spec.dummy_threshold), "model1: threshold must be finite");
  require(spec.gamma.size() == 0 || spec.gamma.size() == spec.k,
          "model1: gamma must be empty or have length K");

  const Index n = spec.n;
  SimulatedDesign out;
  out.beta = spec.beta;

  // 1(v >= c) with v = Phi^{-1}(U) is 1(U >= Phi(c)).
  const double cut = normal_cdf(spec.dummy_threshold);
  out.w.resize(n, spec.k);
  for (Index j = 0; j < spec.k; ++j) {
    for (Index i = 0; i < n; ++i) out.w(i, j) = rng.uniform() >= cut ? 1.0 : 0.0;
  }
  const Vector dummy_sum = out.w.rowwise().sum();

  VarianceConstants kc;
  if (spec.hetero) kc = calibrate_variance_constants(spec);

  out.x.resize(n, 1);
  out.error_sd.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double s = dummy_sum(i);
    const double eta = rng.normal();
    if (spec.hetero) {
      const double x = std::sqrt(kc.kappa_v * (1.0 + s * s)) * eta;
      const double shift = hetero_trim(x) + s;
      out.x(i, 0) = x;
      out.error_sd(i) = std::sqrt(kc.kappa_u * (1.0 + shift * shift));
    } else {
      out.x(i, 0) = eta;
      out.error_sd(i) = 1.0;
    }
  }
  out.mean = spec.beta * out.x.col(0);
  if (spec.gamma.size() > 0) out.mean += out.w * spec.gamma;
  return out;
}

SimulatedDesign draw_panel_design(const PanelSpec& spec, RandomStream& rng) {
  require(spec.units >= 1, "panel: need at least one unit");
  require(spec.periods >= 2, "panel: T must be at least 2");
  require(spec.alpha.size() == 0 || spec.alpha.size() == spec.units,
          "panel: alpha must be empty or have one entry per unit");

  const Index t_len = spec.periods;
  const Index n = spec.units * t_len;
  SimulatedDesign out;
  out.beta = spec.beta;
  out.w = Matrix::Zero(n, spec.units);
  out.x.resize(n, 1);
  out.mean.resize(n);
  out.error_sd.resize(n);

  double kappa_u = 1.0;
  if (spec.hetero) {
    Model1Spec no_dummies;
    no_dummies.k = 0;
    kappa_u = calibrate_variance_constants(no_dummies).kappa_u;
  }

  for (Index unit = 0; unit < spec.units; ++unit) {
    const double alpha = spec.alpha.size() > 0 ? spec.alpha(unit) : 0.0;
    for (Index t = 0; t < t_len; ++t) {
      const Index row = unit * t_len + t;
      const double x = rng.normal();
      out.w(row, unit) = 1.0;
      out.x(row, 0) = x;
      out.mean(row) = alpha + spec.beta * x;
      const double trimmed = hetero_trim(x);
      out.error_sd(row) = spec.hetero ? std::sqrt(kappa_u * (1.0 + trimmed * trimmed)) : 1.0;
    }
  }
  return out;
}

SimulatedDesign draw_plm_design(const PlmSpec& spec, RandomStream& rng) {
  require(spec.n > 0 && spec.dim_z >= 1 && spec.order >= 0,
          "plm: need n > 0, dim_z >= 1 and order >= 0");
  const Index dim = power_series_dimension(spec.order, spec.dim_z);
  if (dim >= spec.n) {
    throw Error(ErrorKind::kUsage, "plm: basis dimension " + std::to_string(dim) +
                                       " must be below n=" + std::to_string(spec.n));
  }

  const Index n = spec.n;
  Matrix z(spec.dim_z, n);  // one column per observation
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < spec.dim_z; ++k) z(k, i) = 2.0 * rng.uniform() - 1.0;
  }

  const auto exponents = monomial_exponents(spec.order, spec.dim_z);
  SimulatedDesign out;
  out.beta = spec.beta;
  out.w.resize(n, static_cast<Index>(exponents.size()));
  for (Index i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < exponents.size(); ++j) {
      double v = 1.0;
      for (Index k = 0; k < spec.dim_z; ++k) {
        for (int e = 0; e < exponents[j][static_cast<std::size_t>(k)]; ++e) v *= z(k, i);
      }
      out.w(i, static_cast<Index>(j)) = v;
    }
  }

  out.x.resize(n, 1);
  out.mean.resize(n);
  out.error_sd = Vector::Ones(n);
  for (Index i = 0; i < n; ++i) {
    const double* zi = z.col(i).data();
    const double m = smooth(SmoothFunction::kSine, zi, spec.dim_z) / 2.0;
    const double x = m + rng.normal();
    out.x(i, 0) = x;
    out.mean(i) = spec.beta * x + smooth(spec.g, zi, spec.dim_z);
  }
  return out;
}

Vector draw_outcome(const SimulatedDesign& design, RandomStream& rng) {
  Vector y(design.mean.size());
  for (Index i = 0; i < y.size(); ++i) y(i) = design.mean(i) + design.error_sd(i) * rng.normal();
  return y;
}

RegressionData to_regression_data(const SimulatedDesign& design, Vector y) {
  return RegressionData{std::move(y), design.x, design.w};
}

RegressionData gen_model1(const Model1Spec& spec) {
  RandomStream rng(spec.seed, streams::kReplication, 0);
  const SimulatedDesign design = draw_model1_design(spec, rng);
  return to_regression_data(design, draw_outcome(design, rng));
}

RegressionData gen_panel(const PanelSpec& spec) {
  RandomStream rng(spec.seed, streams::kReplication, 0);
  const SimulatedDesign design = draw_panel_design(spec, rng);
  return to_regression_data(design, draw_outcome(design, rng));
}

RegressionData gen_plm(const PlmSpec& spec) {
  RandomStream rng(spec.seed, streams::kReplication, 0);
  const SimulatedDesign design = draw_plm_design(spec, rng);
  return to_regression_data(design, draw_outcome(design, rng));
}

}  // namespace hck
