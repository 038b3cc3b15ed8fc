// Acceptance run: one PASS/FAIL line per criterion, followed by the measured
// quantities. Exits nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "../support.hpp"
#include "hck/cli/commands.hpp"
#include "hck/dgp.hpp"
#include "hck/error.hpp"
#include "hck/kappa.hpp"
#include "hck/parallel.hpp"
#include "hck/regression.hpp"
#include "hck/simulation.hpp"
#include "hck/variance.hpp"

using namespace hck;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

// 50 random designs with n in [20, 300] and K in [0, n/2 - d - 1], d = 1.
struct RandomDesign {
  Matrix w;
  std::uint64_t seed;
};

std::vector<RandomDesign> random_designs() {
  std::vector<RandomDesign> out;
  RandomStream rng(2024, 11);
  for (int i = 0; i < 50; ++i) {
    const Index n = 20 + static_cast<Index>(rng.below(281));
    const Index k_max = n / 2 - 2;
    // Every tenth design has no nuisance covariates at all.
    const Index k = (i % 10 == 0) ? 0 : static_cast<Index>(rng.below(static_cast<std::uint64_t>(k_max) + 1));
    out.push_back({test::random_nuisance(n, k, rng), 1000 + static_cast<std::uint64_t>(i)});
  }
  return out;
}

Outcome criterion1(const std::vector<RandomDesign>& designs) {
  const auto t0 = Clock::now();
  double worst_trace = 0.0, worst_mw = 0.0, worst_rows = 0.0;
  for (const RandomDesign& d : designs) {
    const AnnihilatorRep rep = annihilator(d.w);
    const double n = static_cast<double>(rep.n());
    worst_trace = std::max(worst_trace, std::abs(rep.m.trace() - (n - static_cast<double>(d.w.cols()))));
    if (d.w.cols() > 0) worst_mw = std::max(worst_mw, (rep.m * d.w).cwiseAbs().maxCoeff());
    const Vector rows = rep.m.array().square().rowwise().sum();
    worst_rows = std::max(worst_rows, (rows - rep.diag).cwiseAbs().maxCoeff());
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = worst_trace <= 1e-6 && worst_mw <= 1e-8 && worst_rows <= 1e-8 && secs < 10.0;
  o.detail = "max|tr M - (n-K)|=" + fmt("%.3g", worst_trace) + " max|MW|=" + fmt("%.3g", worst_mw) +
             " max|sum_j M_ij^2 - M_ii|=" + fmt("%.3g", worst_rows) + " runtime=" + fmt("%.2f", secs) + "s";
  return o;
}

Outcome criterion2(const std::vector<RandomDesign>& designs) {
  double worst_residual = 0.0, worst_varah = 0.0;
  int solved = 0, inverted = 0;
  bool ok = true;
  for (const RandomDesign& d : designs) {
    const AnnihilatorRep rep = annihilator(d.w);
    if (!(rep.mcal < 0.45)) continue;
    RandomStream rng(d.seed, 5);
    Vector e(rep.n());
    for (Index i = 0; i < rep.n(); ++i) e(i) = (0.5 + std::abs(rng.normal())) * rng.normal();
    const Vector u_sq = (rep.m * e).array().square().matrix();
    const Vector ut = solve_kappa_system(rep, u_sq);
    const Matrix mm = rep.m.cwiseProduct(rep.m);
    const double rel = (mm * ut - u_sq).cwiseAbs().maxCoeff() / u_sq.cwiseAbs().maxCoeff();
    worst_residual = std::max(worst_residual, rel);
    ok = ok && rel <= 1e-8;
    ++solved;
    if (rep.n() <= 150) {
      const Matrix inv = mm.inverse();
      const double norm = inv.cwiseAbs().rowwise().sum().maxCoeff();
      const double bound = 1.0 / (0.5 - rep.mcal);
      worst_varah = std::max(worst_varah, norm / bound);
      ok = ok && norm <= bound * (1.0 + 1e-12);
      ++inverted;
    }
  }
  // n = 3, W = iota: u~^2 = 3/2 for u^2 = 1.
  const AnnihilatorRep three = annihilator(Matrix::Ones(3, 1));
  const Vector ut3 = solve_kappa_system(three, Vector::Ones(3));
  const double err3 = (ut3.array() - 1.5).abs().maxCoeff();
  ok = ok && err3 <= 1e-12 && solved > 0 && inverted > 0;
  Outcome o;
  o.pass = ok;
  o.detail = "designs with Mcal<0.45: " + std::to_string(solved) + ", max rel residual=" +
             fmt("%.3g", worst_residual) + "; explicit inverses: " + std::to_string(inverted) +
             ", max ||kappa||_inf / Varah bound=" + fmt("%.4f", worst_varah) +
             "; n=3 iota max|u~^2 - 3/2|=" + fmt("%.3g", err3);
  return o;
}

Outcome criterion3() {
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Index n = 30 + 7 * i;
    const Index d = 1 + i % 3;
    const Index k = 1 + (i * 5) % (n / 2 - d);
    const RegressionData data = test::random_data(n, d, k, 500 + static_cast<std::uint64_t>(i));
    const PreparedFit p = fit_ols(data);
    const Vector oracle = test::ols_oracle(data).head(d);
    worst = std::max(worst, (p.fit.beta_hat - oracle).cwiseAbs().maxCoeff() / oracle.cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-8, "max relative |beta_partialled - beta_full|=" + fmt("%.3g", worst)};
}

Outcome criterion4() {
  double worst = 0.0;
  for (Index units : {5, 40, 150}) {
    PanelSpec spec;
    spec.units = units;
    spec.periods = 3;
    spec.hetero = true;
    spec.seed = static_cast<std::uint64_t>(units);
    const PreparedFit p = fit_ols(gen_panel(spec));
    const Matrix hc3 = compute_meat(p.fit, EstimatorKind::kHC3).sigma_mat;
    const Matrix hc4 = compute_meat(p.fit, EstimatorKind::kHC4).sigma_mat;
    worst = std::max(worst, (hc3 - hc4).cwiseAbs().maxCoeff() / hc3.cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-12, "max relative |HC4 - HC3| meat=" + fmt("%.3g", worst) + " (N=5,40,150)"};
}

Outcome criterion5() {
  PanelSpec spec;
  spec.units = 30;
  spec.periods = 2;
  spec.seed = 1;
  const PreparedFit two = fit_ols(gen_panel(spec));
  const double mcal2 = two.fit.annihilator->mcal;
  std::string err2 = "none";
  bool infeasible = false;
  try {
    compute_meat(two.fit, EstimatorKind::kHCK);
  } catch (const Error& e) {
    infeasible = e.kind() == ErrorKind::kInfeasible;
    err2 = to_string(e.kind());
  }
  spec.periods = 3;
  const PreparedFit three = fit_ols(gen_panel(spec));
  bool ok3 = true;
  try {
    ok3 = compute_meat(three.fit, EstimatorKind::kHCK).sigma_mat(0, 0) > 0.0;
  } catch (const Error&) {
    ok3 = false;
  }
  const bool pass = std::abs(mcal2 - 0.5) <= 1e-12 && infeasible && ok3;
  return {pass, "T=2: Mcal=" + fmt("%.17g", mcal2) + " HCK error=" + err2 +
                    "; T=3: Mcal=" + fmt("%.6f", three.fit.annihilator->mcal) +
                    (ok3 ? " HCK ok" : " HCK failed")};
}

Outcome criterion6() {
  // One-way fixed effects, N = 40, T = 3 (n = 120, K = 40), known
  // heteroskedastic variances, u_hat = M u with u_i ~ N(0, sigma_i^2).
  const auto t0 = Clock::now();
  const Index units = 40, periods = 3, n = units * periods;
  const AnnihilatorRep rep = annihilator(test::fe_dummies(units, periods));
  RandomStream design_rng(6, 1);
  Vector sigma_sq(n);
  for (Index i = 0; i < n; ++i) {
    const double x = design_rng.normal();
    sigma_sq(i) = 1.0 + hetero_trim(x) * hetero_trim(x);
  }
  const int reps = 20000;
  const unsigned threads = resolve_threads(0);
  const std::size_t chunks = 50;
  std::vector<Vector> sums(chunks, Vector::Zero(n)), sums2(chunks, Vector::Zero(n));
  parallel_for(chunks, threads, [&](std::size_t c) {
    for (int s = static_cast<int>(c); s < reps; s += static_cast<int>(chunks)) {
      RandomStream rng(6, streams::kReplication, static_cast<std::uint64_t>(s));
      Vector u(n);
      for (Index i = 0; i < n; ++i) u(i) = std::sqrt(sigma_sq(i)) * rng.normal();
      const Vector u_hat = rep.m * u;
      const Vector ut = solve_kappa_system(rep, u_hat.array().square().matrix());
      sums[c] += ut;
      sums2[c] += ut.array().square().matrix();
    }
  });
  Vector sum = Vector::Zero(n), sum2 = Vector::Zero(n);
  for (std::size_t c = 0; c < chunks; ++c) {
    sum += sums[c];
    sum2 += sums2[c];
  }
  int within = 0, within_3se = 0;
  double mean_rel_se = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double mean = sum(i) / reps;
    const double se = std::sqrt((sum2(i) / reps - mean * mean) / reps);
    if (std::abs(mean / sigma_sq(i) - 1.0) <= 0.02) ++within;
    if (std::abs(mean - sigma_sq(i)) <= 3.0 * se) ++within_3se;
    mean_rel_se += se / sigma_sq(i) / static_cast<double>(n);
  }
  const double share = static_cast<double>(within) / static_cast<double>(n);
  const double secs = seconds_since(t0);
  return {share >= 0.95 && secs < 300.0,
          "indices within 2%: " + std::to_string(within) + "/" + std::to_string(n) + " (" +
              fmt("%.3f", share) + ", need 0.95); within 3 MC s.e.: " + std::to_string(within_3se) +
              "/" + std::to_string(n) + "; mean MC relative s.e.=" + fmt("%.4f", mean_rel_se) +
              " runtime=" + fmt("%.1f", secs) + "s"};
}

std::string coverage_str(const CoverageCell* c) {
  return fmt("%.4f", c->coverage) + " (" + std::to_string(c->successes) + " ok, " +
         std::to_string(c->failures) + " failed)";
}

bool in_band(double v, double lo, double hi) { return !std::isnan(v) && v >= lo && v <= hi; }

Outcome criterion7() {
  const auto t0 = Clock::now();
  SimulationSpec spec;
  spec.model = ModelKind::kModel1;
  spec.model1.n = 700;
  spec.model1.k = 281;
  SimulationOptions opts;
  opts.replications = 2000;
  opts.level = 0.95;
  opts.seed = 7;
  opts.threads = 0;

  spec.model1.hetero = false;
  const SimulationReport homo = run_monte_carlo(spec, opts);
  spec.model1.hetero = true;
  const SimulationReport het = run_monte_carlo(spec, opts);

  auto cell = [](const SimulationReport& r, EstimatorKind k) {
    return r.find(k, IntervalMethod::kGaussian);
  };
  const double ho1 = cell(homo, EstimatorKind::kHO1)->coverage;
  const double hck_homo = cell(homo, EstimatorKind::kHCK)->coverage;
  const double hc0 = cell(het, EstimatorKind::kHC0)->coverage;
  const double hc3 = cell(het, EstimatorKind::kHC3)->coverage;
  const double hck = cell(het, EstimatorKind::kHCK)->coverage;

  const bool a = in_band(ho1, 0.935, 0.965) && in_band(hck_homo, 0.935, 0.965);
  const bool b = !std::isnan(hck) && hc0 < hck && hc3 >= hck && in_band(hck, 0.92, 0.97);
  std::ostringstream os;
  os << "(a) " << (a ? "pass" : "fail") << ": HO1 " << coverage_str(cell(homo, EstimatorKind::kHO1))
     << ", HCK " << coverage_str(cell(homo, EstimatorKind::kHCK)) << "; (b) " << (b ? "pass" : "fail")
     << ": HC0 " << coverage_str(cell(het, EstimatorKind::kHC0)) << ", HC3 "
     << coverage_str(cell(het, EstimatorKind::kHC3)) << ", HCK "
     << coverage_str(cell(het, EstimatorKind::kHCK)) << "; mean Mcal=" << fmt("%.4f", het.mean_mcal)
     << ", HCK-infeasible designs=" << homo.hck_infeasible_designs << "+" << het.hck_infeasible_designs
     << "/" << 2 * opts.replications << ", mean K_effective=" << fmt("%.1f", het.mean_k_effective)
     << "; other coverages (hetero): HO1 " << fmt("%.4f", cell(het, EstimatorKind::kHO1)->coverage)
     << " HC1 " << fmt("%.4f", cell(het, EstimatorKind::kHC1)->coverage) << " HC2 "
     << fmt("%.4f", cell(het, EstimatorKind::kHC2)->coverage) << " HC4 "
     << fmt("%.4f", cell(het, EstimatorKind::kHC4)->coverage)
     << "; runtime=" << fmt("%.0f", seconds_since(t0)) << "s";
  return {a && b, os.str()};
}

Outcome criterion8() {
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 100; ++i) {
    const Index n = 40 + 3 * i;
    const Index d = 1 + i % 4;
    const Index k = 1 + (i * 7) % (n / 2 - d);
    const PreparedFit p = fit_ols(test::random_data(n, d, k, 800 + static_cast<std::uint64_t>(i)));
    const Matrix hc2 = sandwich(p.fit, compute_meat(p.fit, EstimatorKind::kHC2)).omega_mat;
    const Matrix hc3 = sandwich(p.fit, compute_meat(p.fit, EstimatorKind::kHC3)).omega_mat;
    const Matrix diff = hc3 - hc2;
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (diff + diff.transpose()), Eigen::EigenvaluesOnly);
    worst = std::min(worst, eig.eigenvalues().minCoeff() / diff.trace());
  }
  return {worst >= -1e-10, "min over fits of lambda_min(HC3 - HC2) / trace=" + fmt("%.3g", worst)};
}

Outcome criterion9() {
  std::string detail;
  bool ok = true;
  for (const char* format : {"text", "csv", "json"}) {
    std::vector<std::string> outputs;
    for (const char* threads : {"1", "2", "5"}) {
      std::ostringstream out, err;
      const int code = cli::run_cli({"simulate", "--model", "panel", "--units", "20", "--periods", "3",
                                     "--hetero", "--s", "40", "--seed", "9", "--methods",
                                     "gaussian,bootstrap", "--bootstrap-b", "100", "--threads", threads,
                                     "--format", format},
                                    out, err);
      ok = ok && code == 0;
      outputs.push_back(out.str());
    }
    const bool same = outputs[0] == outputs[1] && outputs[0] == outputs[2];
    ok = ok && same;
    detail += std::string(detail.empty() ? "" : ", ") + format + (same ? " identical" : " DIFFERENT") +
              " (" + std::to_string(outputs[0].size()) + " bytes)";
  }
  return {ok, "threads 1/2/5: " + detail};
}

Outcome criterion10() {
  const Index dim = power_series_dimension(3, 10);
  PlmSpec spec;
  spec.n = 1000;
  spec.order = 3;
  spec.dim_z = 10;
  const RegressionData data = gen_plm(spec);
  const Index k_eff = annihilator(prune_collinear(data.w).w).k_effective;
  const double ratio = static_cast<double>(k_eff) / static_cast<double>(data.n());
  return {dim == 286 && data.k() == 286 && k_eff == 286 && std::abs(ratio - 0.286) < 1e-15,
          "dimension=" + std::to_string(dim) + " K_effective=" + std::to_string(k_eff) +
              " K/n=" + fmt("%.3f", ratio)};
}

}  // namespace

int main() {
  const std::vector<RandomDesign> designs = random_designs();
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, [&] { return criterion1(designs); }},
      {2, [&] { return criterion2(designs); }},
      {3, criterion3},
      {4, criterion4},
      {5, criterion5},
      {6, criterion6},
      {7, criterion7},
      {8, criterion8},
      {9, criterion9},
      {10, criterion10},
  };
  int failed = 0;
  for (const auto& [id, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("criterion %d: %s  %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
