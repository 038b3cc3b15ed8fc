#include "hck/kappa.hpp"

#include <algorithm>
#include <mutex>
#include <sstream>

#include "hck/error.hpp"
#include "hck/kernels.hpp"

namespace hck {
namespace {

std::span<const double> as_span(const Matrix& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}
std::span<const double> as_span(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

Vector hadamard_matvec(const AnnihilatorRep& rep, const Vector& x) {
  Vector y(rep.n());
  kernels::hadamard_square_matvec(as_span(rep.m), static_cast<std::size_t>(rep.n()), as_span(x),
                                  {y.data(), static_cast<std::size_t>(y.size())});
  return y;
}

}  // namespace

KappaFactor::KappaFactor(const AnnihilatorRep& rep)
    : design_key_(rep.design_key), diag_(rep.diag) {
  if (!hck_feasible(rep.mcal)) {
    std::ostringstream msg;
    msg << "HCK infeasible: max leverage mcal=" << rep.mcal << " is not below 1/2";
    throw Error(ErrorKind::kInfeasible, msg.str());
  }
  const Index n = rep.n();
  Matrix hadamard(n, n);
  kernels::hadamard_square(as_span(rep.m),
                           {hadamard.data(), static_cast<std::size_t>(hadamard.size())});
  llt_.compute(hadamard);
  if (llt_.info() != Eigen::Success) {
    // Gershgorin lower bound on the smallest eigenvalue: min_i M_ii (2 M_ii - 1).
    const double gershgorin = (rep.diag.array() * (2.0 * rep.diag.array() - 1.0)).minCoeff();
    std::ostringstream msg;
    msg << "Cholesky factorization of M (*) M failed (Gershgorin eigenvalue bound "
        << gershgorin << ")";
    throw Error(ErrorKind::kNumerical, msg.str());
  }
  rcond_ = llt_.rcond();
}

bool KappaFactor::matches(const AnnihilatorRep& rep) const {
  return rep.design_key == design_key_ && rep.diag.size() == diag_.size() &&
         rep.diag == diag_;
}

Vector KappaFactor::solve(const AnnihilatorRep& rep, const Vector& u_sq) const {
  if (u_sq.size() != rep.n()) {
    throw Error(ErrorKind::kData, "solve_kappa_system: right-hand side has the wrong length");
  }
  const double scale = u_sq.cwiseAbs().maxCoeff();
  if (scale == 0.0) return Vector::Zero(u_sq.size());
  const double tolerance = 1e-8 * scale;

  Vector x = llt_.solve(u_sq);
  Vector residual = hadamard_matvec(rep, x) - u_sq;
  if (residual.cwiseAbs().maxCoeff() > tolerance) {
    x -= llt_.solve(residual);
    residual = hadamard_matvec(rep, x) - u_sq;
  }
  const double err = residual.cwiseAbs().maxCoeff();
  if (!(err <= tolerance)) {
    std::ostringstream msg;
    msg << "kappa system solve residual " << err << " exceeds " << tolerance
        << " (reciprocal condition estimate " << rcond_ << ")";
    throw Error(ErrorKind::kNumerical, msg.str());
  }
  return x;
}

std::shared_ptr<const KappaFactor> KappaFactorCache::get_or_build(const AnnihilatorRep& rep) {
  {
    std::shared_lock lock(mutex_);
    for (const auto& entry : entries_) {
      if (entry->matches(rep)) return entry;
    }
  }
  auto built = std::make_shared<const KappaFactor>(rep);
  std::unique_lock lock(mutex_);
  for (const auto& entry : entries_) {
    if (entry->matches(rep)) return entry;
  }
  if (capacity_ == 0) return built;
  if (entries_.size() >= capacity_) entries_.pop_front();
  entries_.push_back(built);
  return built;
}

std::size_t KappaFactorCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

void KappaFactorCache::clear() {
  std::unique_lock lock(mutex_);
  entries_.clear();
}

KappaFactorCache& KappaFactorCache::global() {
  static KappaFactorCache cache;
  return cache;
}

}  // namespace hck
