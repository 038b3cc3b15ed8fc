#pragma once

#include <cmath>
#include <cstdint>

#include "hck/design.hpp"
#include "hck/dgp.hpp"
#include "hck/regression.hpp"
#include "hck/rng.hpp"

namespace hck::test {

inline Matrix normal_matrix(Index rows, Index cols, RandomStream& rng) {
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

// One-way fixed effects dummies, rows ordered unit-major.
inline Matrix fe_dummies(Index units, Index periods) {
  Matrix w = Matrix::Zero(units * periods, units);
  for (Index i = 0; i < units; ++i) w.block(i * periods, i, periods, 1).setOnes();
  return w;
}

// Intercept plus k - 1 Gaussian columns.
inline Matrix random_nuisance(Index n, Index k, RandomStream& rng) {
  if (k == 0) return Matrix(n, 0);
  Matrix w(n, k);
  w.col(0).setOnes();
  w.rightCols(k - 1) = normal_matrix(n, k - 1, rng);
  return w;
}

// X correlated with W, heteroskedastic errors.
inline RegressionData random_data(Index n, Index d, Index k, std::uint64_t seed) {
  RandomStream rng(seed, 99);
  RegressionData data;
  data.w = random_nuisance(n, k, rng);
  data.x = normal_matrix(n, d, rng);
  if (k > 0) data.x += 0.5 * data.w * normal_matrix(k, d, rng) / std::sqrt(static_cast<double>(k));
  const Vector beta = Vector::LinSpaced(d, 1.0, 2.0);
  const Vector gamma = normal_matrix(k, 1, rng);
  data.y = data.x * beta + data.w * gamma;
  for (Index i = 0; i < n; ++i) data.y(i) += (0.5 + std::abs(data.x(i, 0))) * rng.normal();
  return data;
}

// Full-design least squares [X, W] by an independent dense solver.
inline Vector ols_oracle(const RegressionData& data) {
  Matrix design(data.n(), data.d() + data.k());
  design << data.x, data.w;
  return design.colPivHouseholderQr().solve(data.y);
}

inline std::shared_ptr<const AnnihilatorRep> make_rep(const Matrix& w) {
  return std::make_shared<const AnnihilatorRep>(annihilator(w));
}

}  // namespace hck::test
