#include "hck/regression.hpp"

#include <algorithm>
#include <sstream>

#include "hck/error.hpp"

namespace hck {

PartialledFit fit_partialled(const RegressionData& data,
                             std::shared_ptr<const AnnihilatorRep> rep) {
  data.validate();
  const Index n = data.n();
  const Index d = data.d();
  if (!rep || rep->n() != n) {
    throw Error(ErrorKind::kData, "fit_partialled: annihilator does not match the data");
  }
  if (n <= d + rep->k_effective) {
    std::ostringstream msg;
    msg << "no residual degrees of freedom: n=" << n << ", d=" << d
        << ", K=" << rep->k_effective;
    throw Error(ErrorKind::kIdentification, msg.str());
  }

  PartialledFit fit;
  fit.n = n;
  fit.d = d;
  fit.k_effective = rep->k_effective;
  fit.v_hat.noalias() = rep->m * data.x;

  const Matrix vtv = fit.v_hat.transpose() * fit.v_hat;
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(vtv, Eigen::EigenvaluesOnly);
  const double min_eig = eig.eigenvalues().minCoeff();
  // Relative to the unpartialled X'X, so the test is meaningful for d = 1.
  const double scale = data.x.squaredNorm();
  if (!(scale > 0.0) || min_eig < 1e-12 * scale) {
    std::ostringstream msg;
    msg << "X collinear with W: smallest eigenvalue of the partialled Gram matrix is "
        << min_eig << " (trace of X'X " << scale << ")";
    throw Error(ErrorKind::kIdentification, msg.str());
  }

  const Eigen::LLT<Matrix> llt(vtv);
  fit.beta_hat = llt.solve(fit.v_hat.transpose() * data.y);
  // M(y - X b) = M y - v_hat b.
  fit.u_hat.noalias() = rep->m * data.y;
  fit.u_hat.noalias() -= fit.v_hat * fit.beta_hat;
  // Exact fit: residuals at rounding level are zero residuals.
  const double y_scale = std::max(data.y.cwiseAbs().maxCoeff(), (data.x * fit.beta_hat).cwiseAbs().maxCoeff());
  if (fit.u_hat.cwiseAbs().maxCoeff() <= kExactFitTolerance * y_scale) fit.u_hat.setZero();
  fit.gamma_mat = vtv / static_cast<double>(n);
  fit.annihilator = std::move(rep);
  return fit;
}

PreparedFit fit_ols(const RegressionData& data, const FitOptions& options) {
  data.validate();
  PruneResult pruned = prune_collinear(data.w, options.prune_tolerance);
  auto rep = std::make_shared<const AnnihilatorRep>(annihilator(pruned.w, options.design));
  RegressionData reduced{data.y, data.x, std::move(pruned.w)};
  return PreparedFit{fit_partialled(reduced, std::move(rep)), std::move(pruned.report)};
}

}  // namespace hck
