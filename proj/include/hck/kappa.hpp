#pragma once

#include <cstddef>
#include <list>
#include <memory>
#include <shared_mutex>

#include "hck/design.hpp"

namespace hck {

// Cholesky factorization of the Hadamard square M (*) M of an annihilator.
// M (*) M is positive semidefinite (Schur product theorem) and strictly
// diagonally dominant when mcal < 1/2, so the factorization exists exactly
// when HCK is feasible.
class KappaFactor {
 public:
  // Throws kInfeasible when mcal >= 1/2 and kNumerical if the factorization
  // breaks down anyway.
  explicit KappaFactor(const AnnihilatorRep& rep);

  // Solves against u_sq and enforces the residual contract, with one step of
  // iterative refinement if needed. `rep` must be the annihilator this
  // factor was built from.
  Vector solve(const AnnihilatorRep& rep, const Vector& u_sq) const;

  // Reciprocal condition estimate of M (*) M (1-norm).
  double rcond() const { return rcond_; }

  bool matches(const AnnihilatorRep& rep) const;

 private:
  Eigen::LLT<Matrix> llt_;
  double rcond_ = 0.0;
  std::uint64_t design_key_ = 0;
  Vector diag_;
};

// Bounded cache of factorizations keyed by design, shared across threads
// (concurrent readers, exclusive insertion). Entries are n x n, so only a few
// designs are retained; least recently inserted entries are evicted first.
class KappaFactorCache {
 public:
  explicit KappaFactorCache(std::size_t capacity = 4) : capacity_(capacity) {}

  std::shared_ptr<const KappaFactor> get_or_build(const AnnihilatorRep& rep);

  std::size_t size() const;
  void clear();

  static KappaFactorCache& global();

 private:
  mutable std::shared_mutex mutex_;
  std::size_t capacity_;
  std::list<std::shared_ptr<const KappaFactor>> entries_;
};

}  // namespace hck
