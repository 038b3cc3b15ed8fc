#pragma once

#include <memory>

#include "hck/design.hpp"

namespace hck {

// OLS of y on [X, W] in partialled-out form: v_hat = M X, beta_hat solves
// (v_hat' v_hat) beta = v_hat' y, u_hat = M (y - X beta_hat), and
// gamma_mat = v_hat' v_hat / n.
struct PartialledFit {
  Vector beta_hat;
  Matrix v_hat;
  Vector u_hat;
  Matrix gamma_mat;
  std::shared_ptr<const AnnihilatorRep> annihilator;
  Index n = 0;
  Index d = 0;
  Index k_effective = 0;
};

// Residuals no larger than this times max(|y|, |X beta_hat|) are set to zero.
inline constexpr double kExactFitTolerance = 1e-12;

// Requires rep to be built from data.w (after pruning). Throws
// ErrorKind::kIdentification when n <= d + K or when X is collinear with W
// (smallest eigenvalue of v_hat' v_hat below 1e-12 times the trace of X'X).
PartialledFit fit_partialled(const RegressionData& data,
                             std::shared_ptr<const AnnihilatorRep> rep);

struct FitOptions {
  double prune_tolerance = kDefaultPruneTolerance;
  DesignOptions design;
};

struct PreparedFit {
  PartialledFit fit;
  PruneReport prune;
};

// prune -> annihilator -> fit_partialled.
PreparedFit fit_ols(const RegressionData& data, const FitOptions& options = {});

}  // namespace hck
