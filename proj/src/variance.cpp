#include "hck/variance.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "hck/error.hpp"
#include "hck/kappa.hpp"
#include "hck/kernels.hpp"

namespace hck {
namespace {

// (1/n) sum_i w_i v_i v_i'
Matrix weighted_meat(const PartialledFit& fit, const Vector& weights) {
  const auto n = static_cast<std::size_t>(fit.n);
  const auto d = static_cast<std::size_t>(fit.d);
  Matrix out(fit.d, fit.d);
  kernels::weighted_gram({fit.v_hat.data(), n * d}, n, d, {weights.data(), n},
                         {out.data(), d * d});
  return out / static_cast<double>(fit.n);
}

}  // namespace

std::string to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::kHO0: return "HO0";
    case EstimatorKind::kHO1: return "HO1";
    case EstimatorKind::kHC0: return "HC0";
    case EstimatorKind::kHC1: return "HC1";
    case EstimatorKind::kHC2: return "HC2";
    case EstimatorKind::kHC3: return "HC3";
    case EstimatorKind::kHC4: return "HC4";
    case EstimatorKind::kHCK: return "HCK";
  }
  return "?";
}

std::optional<EstimatorKind> parse_estimator(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (EstimatorKind kind : kAllEstimators) {
    if (upper == to_string(kind)) return kind;
  }
  return std::nullopt;
}

bool is_psd(const Matrix& sym) {
  if (sym.size() == 0) return true;
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff() >= -1e-10 * std::fabs(sym.trace());
}

MeatEstimate meat_ho(const PartialledFit& fit, bool dof_adjust) {
  const double ssr = fit.u_hat.squaredNorm();
  const double denom =
      dof_adjust ? static_cast<double>(fit.n - fit.d - fit.k_effective) : static_cast<double>(fit.n);
  MeatEstimate out;
  out.kind = dof_adjust ? EstimatorKind::kHO1 : EstimatorKind::kHO0;
  out.aux.sigma2 = ssr / denom;
  out.sigma_mat = out.aux.sigma2 * fit.gamma_mat;
  out.psd = true;
  return out;
}

MeatEstimate meat_hc_diag(const PartialledFit& fit, EstimatorKind kind) {
  const Vector& leverage = fit.annihilator->diag;
  const double n = static_cast<double>(fit.n);
  const double k = static_cast<double>(fit.k_effective);

  Vector weights(fit.n);
  std::vector<Index> unit_leverage;
  for (Index i = 0; i < fit.n; ++i) {
    // Leverage within rounding of one is treated as exactly one (M_ii = 0).
    const double m_ii = leverage(i) <= kUnitLeverageTolerance ? 0.0 : leverage(i);
    double upsilon = 1.0;
    double xi = 0.0;
    switch (kind) {
      case EstimatorKind::kHC0: break;
      case EstimatorKind::kHC1: upsilon = n / (n - k); break;
      case EstimatorKind::kHC2: xi = 1.0; break;
      case EstimatorKind::kHC3: xi = 2.0; break;
      case EstimatorKind::kHC4: xi = fit.k_effective > 0 ? std::min(4.0, n * m_ii / k) : 0.0; break;
      default:
        throw Error(ErrorKind::kUsage, "meat_hc_diag: " + to_string(kind) + " is not an HCk estimator");
    }
    double factor = upsilon;
    if (xi > 0.0) {
      if (m_ii == 0.0) {
        unit_leverage.push_back(i);
        continue;
      }
      factor *= std::pow(m_ii, -xi);
    }
    weights(i) = factor * fit.u_hat(i) * fit.u_hat(i);
  }
  if (!unit_leverage.empty()) {
    std::ostringstream msg;
    msg << to_string(kind) << " undefined: unit leverage observation(s) at indices";
    const std::size_t shown = std::min<std::size_t>(unit_leverage.size(), 20);
    for (std::size_t i = 0; i < shown; ++i) msg << ' ' << unit_leverage[i];
    if (shown < unit_leverage.size()) msg << " ... (" << unit_leverage.size() << " total)";
    throw Error(ErrorKind::kUnitLeverage, msg.str());
  }

  MeatEstimate out;
  out.kind = kind;
  out.sigma_mat = weighted_meat(fit, weights);
  out.psd = true;
  return out;
}

Vector solve_kappa_system(const AnnihilatorRep& rep, const Vector& u_sq) {
  if (!hck_feasible(rep.mcal)) {
    // Checked here as well so an infeasible design never reaches the cache.
    std::ostringstream msg;
    msg << "HCK infeasible: max leverage mcal=" << rep.mcal << " is not below 1/2";
    throw Error(ErrorKind::kInfeasible, msg.str());
  }
  return KappaFactorCache::global().get_or_build(rep)->solve(rep, u_sq);
}

MeatEstimate meat_hck(const PartialledFit& fit) {
  const Vector u_sq = fit.u_hat.array().square().matrix();
  const Vector u_tilde_sq = solve_kappa_system(*fit.annihilator, u_sq);

  MeatEstimate out;
  out.kind = EstimatorKind::kHCK;
  out.sigma_mat = weighted_meat(fit, u_tilde_sq);
  out.psd = is_psd(out.sigma_mat);
  out.aux.negative_u_tilde = (u_tilde_sq.array() < 0.0).count();
  if (u_tilde_sq.size() > 0) {
    out.aux.min_u_tilde_sq = u_tilde_sq.minCoeff();
    out.aux.max_u_tilde_sq = u_tilde_sq.maxCoeff();
  }
  return out;
}

MeatEstimate compute_meat(const PartialledFit& fit, EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::kHO0: return meat_ho(fit, false);
    case EstimatorKind::kHO1: return meat_ho(fit, true);
    case EstimatorKind::kHCK: return meat_hck(fit);
    default: return meat_hc_diag(fit, kind);
  }
}

SandwichEstimate sandwich(const PartialledFit& fit, const MeatEstimate& meat) {
  const Eigen::LLT<Matrix> bread(fit.gamma_mat);
  if (bread.info() != Eigen::Success) {
    throw Error(ErrorKind::kIdentification, "sandwich: Gamma_hat is not positive definite");
  }
  const Matrix left = bread.solve(meat.sigma_mat);         // Gamma^{-1} Sigma
  const Matrix omega = bread.solve(left.transpose());      // Gamma^{-1} Sigma' Gamma^{-1}
  SandwichEstimate out;
  out.kind = meat.kind;
  out.omega_mat = 0.5 * (omega + omega.transpose());
  return out;
}

}  // namespace hck
