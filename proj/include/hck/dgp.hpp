#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "hck/design.hpp"
#include "hck/rng.hpp"

namespace hck {

// t(a): a clamped to [-2, 2].
double hetero_trim(double a);

// Sparse-dummy linear model: x ~ N(0,1), K columns w_j = 1(v_j >= threshold)
// with v ~ N(0, I_K), y = beta x + gamma'w + u. The heteroskedastic branch
// uses V[u|x,w] = kappa_u (1 + (t(x) + i'w)^2), V[x|w] = kappa_v (1 + (i'w)^2).
struct Model1Spec {
  Index n = 700;
  Index k = 1;
  double beta = 1.0;
  Vector gamma;  // empty means zero
  bool hetero = false;
  double dummy_threshold = 2.5;
  std::uint64_t seed = 0;
};

// One-way fixed effects panel: Y_it = alpha_i + beta X_it + U_it with W the
// N unit dummies, rows ordered unit-major ((i-1) T + t).
struct PanelSpec {
  Index units = 100;
  Index periods = 3;
  double beta = 1.0;
  Vector alpha;  // empty means zero
  bool hetero = false;
  std::uint64_t seed = 0;
};

enum class SmoothFunction { kLinear, kSine, kExponential };

std::string to_string(SmoothFunction f);
std::optional<SmoothFunction> parse_smooth_function(std::string_view name);

// Partially linear model y = beta x + g(z) + e with z ~ U[-1, 1]^dim_z,
// x = m(z) + nu, and W the power series basis of total degree <= order.
struct PlmSpec {
  Index n = 1000;
  SmoothFunction g = SmoothFunction::kSine;
  Index order = 3;
  Index dim_z = 10;
  double beta = 1.0;
  std::uint64_t seed = 0;
};

// Number of monomials of total degree <= order in dim_z variables,
// (order + dim_z)! / (order! dim_z!). Saturates at the Index maximum.
Index power_series_dimension(Index order, Index dim_z);

struct VarianceConstants {
  double kappa_u = 1.0;
  double kappa_v = 1.0;
  // Relative standard errors of the Monte Carlo estimates of 1/kappa.
  double rel_se_u = 0.0;
  double rel_se_v = 0.0;
};

inline constexpr Index kDefaultCalibrationDraws = 10'000'000;

// kappa_v = 1 / E[1 + (i'w)^2] and kappa_u = 1 / E[1 + (t(x) + i'w)^2] under
// the heteroskedastic Model 1 law, by seeded Monte Carlo integration. i'w is
// drawn directly as Binomial(K, 1 - Phi(threshold)). Results are memoized on
// (K, threshold, draws) and do not depend on spec.seed.
VarianceConstants calibrate_variance_constants(const Model1Spec& spec,
                                               Index draws = kDefaultCalibrationDraws);

// A drawn design together with the conditional mean and standard deviation of
// the outcome given the design; y = mean + error_sd * N(0,1).
struct SimulatedDesign {
  Matrix x;
  Matrix w;
  Vector mean;
  Vector error_sd;
  double beta = 1.0;
};

SimulatedDesign draw_model1_design(const Model1Spec& spec, RandomStream& rng);
SimulatedDesign draw_panel_design(const PanelSpec& spec, RandomStream& rng);
SimulatedDesign draw_plm_design(const PlmSpec& spec, RandomStream& rng);

Vector draw_outcome(const SimulatedDesign& design, RandomStream& rng);

RegressionData to_regression_data(const SimulatedDesign& design, Vector y);

// Design and outcome drawn from the stream (spec.seed, replication stream, 0).
RegressionData gen_model1(const Model1Spec& spec);
RegressionData gen_panel(const PanelSpec& spec);
RegressionData gen_plm(const PlmSpec& spec);

}  // namespace hck
