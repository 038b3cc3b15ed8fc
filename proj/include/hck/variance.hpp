#pragma once

#include <array>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include "hck/regression.hpp"

namespace hck {

enum class EstimatorKind { kHO0, kHO1, kHC0, kHC1, kHC2, kHC3, kHC4, kHCK };

inline constexpr std::array<EstimatorKind, 8> kAllEstimators = {
    EstimatorKind::kHO0, EstimatorKind::kHO1, EstimatorKind::kHC0, EstimatorKind::kHC1,
    EstimatorKind::kHC2, EstimatorKind::kHC3, EstimatorKind::kHC4, EstimatorKind::kHCK};

// "HO0", "HC3", "HCK", ...
std::string to_string(EstimatorKind kind);
// Case-insensitive inverse of to_string.
std::optional<EstimatorKind> parse_estimator(std::string_view name);

struct MeatAux {
  // Residual variance estimate (HO estimators only).
  double sigma2 = std::numeric_limits<double>::quiet_NaN();
  // HCK: number of negative bias-corrected squared residuals.
  Index negative_u_tilde = 0;
  double min_u_tilde_sq = std::numeric_limits<double>::quiet_NaN();
  double max_u_tilde_sq = std::numeric_limits<double>::quiet_NaN();
};

// d x d "meat" Sigma_hat of the sandwich.
struct MeatEstimate {
  Matrix sigma_mat;
  EstimatorKind kind = EstimatorKind::kHC0;
  bool psd = true;
  MeatAux aux;
};

struct SandwichEstimate {
  Matrix omega_mat;  // Gamma^{-1} Sigma Gamma^{-1}
  EstimatorKind kind = EstimatorKind::kHC0;
};

// Observations whose M_ii is at most this are treated as having unit leverage.
inline constexpr double kUnitLeverageTolerance = 1e-12;

// sigma2 * Gamma_hat, sigma2 = sum u_hat^2 / (n - d - K) when dof_adjust
// (HO1), otherwise / n (HO0).
MeatEstimate meat_ho(const PartialledFit& fit, bool dof_adjust);

// (1/n) sum_i Upsilon_i M_ii^{-xi_i} v_i v_i' u_i^2 with the HC0..HC4 choices
// of (Upsilon, xi). Throws ErrorKind::kUnitLeverage when xi_i > 0 at an
// observation with M_ii = 0, and kUsage for kinds outside HC0..HC4.
MeatEstimate meat_hc_diag(const PartialledFit& fit, EstimatorKind kind);

// Solves (M (*) M) u_tilde_sq = u_sq for the bias-corrected squared residuals.
// Uses the process-wide factorization cache, so repeated calls on the same
// design factor M (*) M once. Throws kInfeasible when mcal >= 1/2 and
// kNumerical when the solve cannot meet its residual contract
// ||(M (*) M) x - u_sq||_inf <= 1e-8 ||u_sq||_inf.
Vector solve_kappa_system(const AnnihilatorRep& rep, const Vector& u_sq);

// (1/n) sum_i v_i v_i' u_tilde_i^2 with u_tilde^2 from solve_kappa_system.
MeatEstimate meat_hck(const PartialledFit& fit);

// Any estimator by kind.
MeatEstimate compute_meat(const PartialledFit& fit, EstimatorKind kind);

SandwichEstimate sandwich(const PartialledFit& fit, const MeatEstimate& meat);

// Smallest eigenvalue >= -1e-10 * |trace|.
bool is_psd(const Matrix& sym);

}  // namespace hck
