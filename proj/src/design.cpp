#include "hck/design.hpp"

#include <algorithm>
#include <cstring>
#include <string>

#include "hck/error.hpp"

namespace hck {
namespace {

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t bytes) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t design_hash(const Matrix& w) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const std::int64_t dims[2] = {w.rows(), w.cols()};
  h = fnv1a(h, dims, sizeof(dims));
  return fnv1a(h, w.data(), static_cast<std::size_t>(w.size()) * sizeof(double));
}

}  // namespace

void RegressionData::validate() const {
  if (x.rows() != y.size() || w.rows() != y.size()) {
    throw Error(ErrorKind::kData, "regression data: y, X and W must have the same number of rows");
  }
  if (x.cols() < 1) throw Error(ErrorKind::kData, "regression data: X needs at least one column");
  if (!y.allFinite() || !x.allFinite() || !w.allFinite()) {
    throw Error(ErrorKind::kData, "regression data: non-finite entries");
  }
}

PruneResult prune_collinear(const Matrix& w, double rel_tol) {
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) {
    throw Error(ErrorKind::kUsage, "prune_collinear: rel_tol must lie in (0, 1)");
  }
  PruneResult out;
  out.report.threshold = rel_tol;
  const Index k = w.cols();
  if (k == 0) {
    out.w = w;
    return out;
  }

  Eigen::ColPivHouseholderQR<Matrix> qr(w);
  const auto r_diag = qr.matrixQR().diagonal().cwiseAbs();
  const double largest = r_diag.size() > 0 ? r_diag(0) : 0.0;

  // Pivots are non-increasing, so the retained set is the leading run.
  Index rank = 0;
  while (rank < r_diag.size() && largest > 0.0 && r_diag(rank) > rel_tol * largest) ++rank;

  std::vector<Index> keep(static_cast<std::size_t>(rank));
  for (Index j = 0; j < rank; ++j) keep[j] = qr.colsPermutation().indices()(j);
  std::sort(keep.begin(), keep.end());

  out.w.resize(w.rows(), rank);
  std::size_t next = 0;
  for (Index j = 0; j < k; ++j) {
    if (next < keep.size() && keep[next] == j) {
      out.w.col(static_cast<Index>(next)) = w.col(j);
      ++next;
    } else {
      out.report.dropped_columns.push_back(j);
    }
  }
  return out;
}

AnnihilatorRep annihilator(const Matrix& w, const DesignOptions& options) {
  const Index n = w.rows();
  const std::uint64_t bytes = static_cast<std::uint64_t>(n) * n * sizeof(double);
  if (bytes > options.memory_cap_bytes) {
    throw Error(ErrorKind::kTooLarge,
                "design too large: dense annihilator for n=" + std::to_string(n) + " needs " +
                    std::to_string(bytes) + " bytes, memory cap is " +
                    std::to_string(options.memory_cap_bytes) + " bytes");
  }

  AnnihilatorRep rep;
  rep.m = Matrix::Identity(n, n);
  if (w.cols() > 0) {
    Eigen::ColPivHouseholderQR<Matrix> qr(w);
    qr.setThreshold(kDefaultPruneTolerance);
    rep.k_effective = qr.rank();
    if (rep.k_effective > 0) {
      const Matrix q = qr.householderQ() * Matrix::Identity(n, rep.k_effective);
      rep.m.selfadjointView<Eigen::Lower>().rankUpdate(q, -1.0);
      for (Index j = 1; j < n; ++j) {
        for (Index i = 0; i < j; ++i) rep.m(i, j) = rep.m(j, i);
      }
    }
  }

  rep.diag.resize(n);
  for (Index i = 0; i < n; ++i) {
    rep.m(i, i) = std::clamp(rep.m(i, i), 0.0, 1.0);
    rep.diag(i) = rep.m(i, i);
  }
  rep.mcal = n > 0 ? 1.0 - rep.diag.minCoeff() : 0.0;
  rep.design_key = design_hash(w);
  return rep;
}

DiagnosticsSummary leverage_diagnostics(const AnnihilatorRep& rep) {
  DiagnosticsSummary s;
  s.n = rep.n();
  s.k_effective = rep.k_effective;
  s.k_over_n = s.n > 0 ? static_cast<double>(rep.k_effective) / static_cast<double>(s.n) : 0.0;
  s.mcal = rep.mcal;
  s.hck_feasible = hck_feasible(rep.mcal);
  if (s.hck_feasible) s.varah_bound = 1.0 / (0.5 - rep.mcal);
  return s;
}

}  // namespace hck
