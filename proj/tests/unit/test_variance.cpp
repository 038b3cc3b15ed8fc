#include <doctest.h>

#include <atomic>
#include <thread>

#include "hck/error.hpp"
#include "hck/kappa.hpp"
#include "hck/variance.hpp"
#include "support.hpp"

using namespace hck;
using hck::test::fe_dummies;

namespace {

PartialledFit fit_of(const RegressionData& data) { return fit_ols(data).fit; }

// n = 3, W = iota, x = (0, 1, 2): v_hat = (-1, 0, 1).
PartialledFit three_point_fit(const Vector& u_hat) {
  RegressionData data;
  data.x = Matrix(3, 1);
  data.x << 0, 1, 2;
  data.w = Matrix::Ones(3, 1);
  data.y = data.x.col(0) + u_hat;
  PartialledFit fit = fit_of(data);
  fit.u_hat = u_hat;
  return fit;
}

Matrix meat_of(const PartialledFit& fit, EstimatorKind kind) { return compute_meat(fit, kind).sigma_mat; }

double min_eigen(const Matrix& a) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(a, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

ErrorKind error_kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an hck::Error");
  return ErrorKind::kUsage;
}

// Panel with unit effects, regressor and heteroskedastic error scale.
struct PanelFixture {
  RegressionData data;
  Vector sigma;
};

PanelFixture panel_fixture(Index units, Index periods, bool hetero, std::uint64_t seed) {
  RandomStream rng(seed, 1);
  PanelFixture p;
  const Index n = units * periods;
  p.data.w = fe_dummies(units, periods);
  p.data.x = test::normal_matrix(n, 1, rng);
  p.sigma = Vector::Ones(n);
  if (hetero) {
    for (Index i = 0; i < n; ++i) p.sigma(i) = std::sqrt(0.5 * (1.0 + std::pow(hetero_trim(p.data.x(i, 0)), 2)));
  }
  p.data.y = Vector::Zero(n);
  return p;
}

}  // namespace

TEST_CASE("estimator names round-trip case-insensitively") {
  for (EstimatorKind k : kAllEstimators) {
    CHECK(parse_estimator(to_string(k)) == k);
    std::string lower = to_string(k);
    for (auto& c : lower) c = static_cast<char>(std::tolower(c));
    CHECK(parse_estimator(lower) == k);
  }
  CHECK_FALSE(parse_estimator("HC5").has_value());
}

TEST_CASE("homoskedastic meats") {
  SUBCASE("zero residuals give a zero meat") {
    PartialledFit fit = fit_of(test::random_data(20, 1, 3, 1));
    fit.u_hat.setZero();
    CHECK(meat_ho(fit, true).sigma_mat.norm() == 0.0);
    CHECK(meat_ho(fit, false).sigma_mat.norm() == 0.0);
  }
  SUBCASE("sigma2 with the degrees-of-freedom correction") {
    PartialledFit fit = fit_of(test::random_data(10, 1, 4, 2));
    REQUIRE(fit.k_effective == 4);
    fit.u_hat *= std::sqrt(5.0 / fit.u_hat.squaredNorm());
    const MeatEstimate m = meat_ho(fit, true);
    CHECK(m.aux.sigma2 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK((m.sigma_mat - fit.gamma_mat).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("HO1 = HO0 n / (n - d - K)") {
    const PartialledFit fit = fit_of(test::random_data(90, 2, 17, 3));
    const double ratio = 90.0 / (90.0 - 2.0 - 17.0);
    CHECK((meat_of(fit, EstimatorKind::kHO1) - ratio * meat_of(fit, EstimatorKind::kHO0)).norm() <=
          1e-12 * meat_of(fit, EstimatorKind::kHO1).norm());
  }
}

TEST_CASE("without nuisance covariates HC0..HC4 and HCK coincide") {
  const PartialledFit fit = fit_of(test::random_data(40, 2, 0, 4));
  const Matrix hc0 = meat_of(fit, EstimatorKind::kHC0);
  for (EstimatorKind k : {EstimatorKind::kHC1, EstimatorKind::kHC2, EstimatorKind::kHC3,
                          EstimatorKind::kHC4, EstimatorKind::kHCK}) {
    CAPTURE(to_string(k));
    CHECK((meat_of(fit, k) - hc0).cwiseAbs().maxCoeff() <= 1e-15 * hc0.norm());
  }
  const MeatEstimate hck = meat_hck(fit);
  CHECK(hck.aux.negative_u_tilde == 0);
  CHECK(hck.psd);
}

TEST_CASE("HC4 reduces to HC3 at balanced leverage 2/3") {
  PanelFixture p = panel_fixture(30, 3, true, 5);
  RandomStream rng(5, 2);
  for (Index i = 0; i < p.data.n(); ++i) p.data.y(i) = p.data.x(i, 0) + p.sigma(i) * rng.normal();
  const PartialledFit fit = fit_of(p.data);
  const Matrix hc3 = meat_of(fit, EstimatorKind::kHC3);
  const Matrix hc4 = meat_of(fit, EstimatorKind::kHC4);
  CHECK((hc4 - hc3).cwiseAbs().maxCoeff() <= 1e-12 * hc3.cwiseAbs().maxCoeff());
}

TEST_CASE("hand-evaluated three-point example") {
  Vector u(3);
  u << 1, -2, 1;
  const PartialledFit fit = three_point_fit(u);
  // (1/3) sum v_i^2 u_i^2 / (2/3) with v = (-1, 0, 1).
  CHECK(meat_of(fit, EstimatorKind::kHC2)(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(meat_of(fit, EstimatorKind::kHC0)(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(meat_of(fit, EstimatorKind::kHC3)(0, 0) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(meat_of(fit, EstimatorKind::kHC1)(0, 0) == doctest::Approx(2.0 / 3.0 * 1.5).epsilon(1e-14));
}

TEST_CASE("kappa system solutions") {
  SUBCASE("identity system when K = 0") {
    const AnnihilatorRep rep = annihilator(Matrix(6, 0));
    Vector u(6);
    u << 1, 4, 0, 2.5, 9, 0.1;
    CHECK((solve_kappa_system(rep, u) - u).cwiseAbs().maxCoeff() <= 1e-15);
  }
  SUBCASE("n = 3 demeaning") {
    const AnnihilatorRep rep = annihilator(Matrix::Ones(3, 1));
    const Vector x = solve_kappa_system(rep, Vector::Ones(3));
    CHECK((x - Vector::Constant(3, 1.5)).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("n = 2 demeaning is infeasible") {
    const AnnihilatorRep rep = annihilator(Matrix::Ones(2, 1));
    CHECK(rep.mcal == doctest::Approx(0.5));
    CHECK(error_kind_of([&] { solve_kappa_system(rep, Vector::Ones(2)); }) == ErrorKind::kInfeasible);
  }
  SUBCASE("residual contract on random feasible designs") {
    int feasible = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      RandomStream rng(seed, 17);
      const Index n = 20 + static_cast<Index>(rng.below(280));
      const Index k = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n / 3)));
      const AnnihilatorRep rep = annihilator(test::random_nuisance(n, k, rng));
      if (!(rep.mcal < 0.45)) continue;
      ++feasible;
      Vector u(n);
      for (Index i = 0; i < n; ++i) u(i) = std::pow(rng.normal(), 2) * (1.0 + i % 3);
      const Vector x = solve_kappa_system(rep, u);
      const Vector resid = rep.m.array().square().matrix() * x - u;
      CHECK(resid.cwiseAbs().maxCoeff() <= 1e-8 * u.cwiseAbs().maxCoeff());
    }
    CHECK(feasible >= 20);
  }
}

TEST_CASE("explicit kappa inverse satisfies the Varah bound") {
  int tested = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    RandomStream rng(seed, 23);
    const Index n = 12 + static_cast<Index>(rng.below(60));
    const Index k = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n / 3)));
    const AnnihilatorRep rep = annihilator(test::random_nuisance(n, k, rng));
    if (!hck_feasible(rep.mcal)) continue;
    ++tested;
    const Matrix kappa = rep.m.array().square().matrix().inverse();
    const double row_sum = kappa.cwiseAbs().rowwise().sum().maxCoeff();
    CHECK(row_sum <= leverage_diagnostics(rep).varah_bound * (1.0 + 1e-10));
    // sum_k kappa_ik M_kj^2 = 1(i = j)
    CHECK((kappa * rep.m.array().square().matrix() - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-9);
  }
  CHECK(tested >= 10);
}

TEST_CASE("HCK meat on the three-point example") {
  const PartialledFit fit = three_point_fit(Vector::Ones(3));
  const MeatEstimate m = meat_hck(fit);
  CHECK(m.sigma_mat(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.aux.min_u_tilde_sq == doctest::Approx(1.5));
  CHECK(m.psd);
}

TEST_CASE("HCK reports infeasibility at T = 2") {
  PanelFixture p = panel_fixture(20, 2, false, 6);
  RandomStream rng(6, 2);
  for (Index i = 0; i < p.data.n(); ++i) p.data.y(i) = rng.normal();
  const PartialledFit fit = fit_of(p.data);
  CHECK(error_kind_of([&] { meat_hck(fit); }) == ErrorKind::kInfeasible);
  CHECK_NOTHROW(meat_hc_diag(fit, EstimatorKind::kHC3));
}

TEST_CASE("unit leverage observations") {
  // A dummy for observation 0 alone gives M_00 = 0.
  RegressionData data = test::random_data(25, 1, 3, 9);
  Matrix w(25, 4);
  w << data.w, Vector::Unit(25, 0);
  data.w = w;
  const PartialledFit fit = fit_of(data);
  REQUIRE(fit.annihilator->diag(0) < 1e-12);
  for (EstimatorKind k : {EstimatorKind::kHC2, EstimatorKind::kHC3}) {
    CHECK(error_kind_of([&] { meat_hc_diag(fit, k); }) == ErrorKind::kUnitLeverage);
  }
  // HC4's exponent is min(4, n M_ii / K) = 0 there.
  CHECK_NOTHROW(meat_hc_diag(fit, EstimatorKind::kHC4));
  CHECK(error_kind_of([&] { meat_hck(fit); }) == ErrorKind::kInfeasible);
  try {
    meat_hc_diag(fit, EstimatorKind::kHC2);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("0") != std::string::npos);
  }
}

TEST_CASE("zero residuals make every meat zero") {
  PartialledFit fit = fit_of(test::random_data(60, 2, 8, 10));
  fit.u_hat.setZero();
  for (EstimatorKind k : kAllEstimators) CHECK(meat_of(fit, k).norm() == 0.0);
}

TEST_CASE("HC3 dominates HC2 and HC1 dominates HC0") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    RandomStream rng(seed, 31);
    const Index n = 20 + static_cast<Index>(rng.below(150));
    const Index d = 1 + static_cast<Index>(rng.below(3));
    const Index k = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n / 2 - d)));
    const PartialledFit fit = fit_of(test::random_data(n, d, k, seed + 1000));
    const Matrix diff = meat_of(fit, EstimatorKind::kHC3) - meat_of(fit, EstimatorKind::kHC2);
    CHECK(min_eigen(diff) >= -1e-10 * std::abs(diff.trace()));
    const Matrix diff1 = meat_of(fit, EstimatorKind::kHC1) - meat_of(fit, EstimatorKind::kHC0);
    CHECK(min_eigen(diff1) >= -1e-10 * std::abs(diff1.trace()));
    for (EstimatorKind kind : {EstimatorKind::kHO0, EstimatorKind::kHO1, EstimatorKind::kHC0,
                               EstimatorKind::kHC1, EstimatorKind::kHC2, EstimatorKind::kHC3,
                               EstimatorKind::kHC4}) {
      const MeatEstimate m = compute_meat(fit, kind);
      CHECK(m.psd);
      CHECK((m.sigma_mat - m.sigma_mat.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * m.sigma_mat.norm());
    }
  }
}

TEST_CASE("sandwich") {
  const PartialledFit fit = fit_of(test::random_data(50, 2, 5, 11));
  SUBCASE("meat equal to the bread gives its inverse") {
    MeatEstimate m;
    m.sigma_mat = fit.gamma_mat;
    const Matrix omega = sandwich(fit, m).omega_mat;
    CHECK((omega - fit.gamma_mat.inverse()).cwiseAbs().maxCoeff() <= 1e-12 * omega.norm());
  }
  SUBCASE("scalar arithmetic") {
    PartialledFit scalar = fit_of(test::random_data(20, 1, 2, 12));
    scalar.gamma_mat = Matrix::Constant(1, 1, 2.0);
    MeatEstimate m;
    m.sigma_mat = Matrix::Constant(1, 1, 8.0);
    CHECK(sandwich(scalar, m).omega_mat(0, 0) == doctest::Approx(2.0));
  }
  SUBCASE("brute force d = 2") {
    const MeatEstimate m = compute_meat(fit, EstimatorKind::kHC3);
    const Matrix g = fit.gamma_mat.inverse();
    const Matrix expect = g * m.sigma_mat * g;
    const Matrix omega = sandwich(fit, m).omega_mat;
    CHECK((omega - expect).cwiseAbs().maxCoeff() <= 1e-12 * expect.norm());
    CHECK(omega == omega.transpose());
  }
}

TEST_CASE("factorization cache reuses, evicts and tolerates concurrency") {
  KappaFactorCache cache(2);
  const AnnihilatorRep a = annihilator(fe_dummies(10, 3));
  const AnnihilatorRep b = annihilator(fe_dummies(12, 3));
  const AnnihilatorRep c = annihilator(fe_dummies(14, 3));
  const auto fa = cache.get_or_build(a);
  CHECK(cache.get_or_build(a) == fa);
  CHECK(fa->matches(a));
  CHECK_FALSE(fa->matches(b));
  cache.get_or_build(b);
  cache.get_or_build(c);
  CHECK(cache.size() == 2);
  CHECK(fa->rcond() > 0.0);

  std::atomic<int> failures{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < 4; ++t) {
    pool.emplace_back([&, t] {
      for (int r = 0; r < 25; ++r) {
        const AnnihilatorRep& rep = (r + t) % 3 == 0 ? a : (r + t) % 3 == 1 ? b : c;
        const auto f = cache.get_or_build(rep);
        if (!f->matches(rep)) ++failures;
        const Vector x = f->solve(rep, Vector::Ones(rep.n()));
        if ((x - Vector::Constant(rep.n(), 1.5)).cwiseAbs().maxCoeff() > 1e-10) ++failures;
      }
    });
  }
  for (auto& th : pool) th.join();
  CHECK(failures == 0);
  CHECK(cache.size() <= 2);
}

namespace {

struct MeatAverage {
  double mean = 0.0;
  double se = 0.0;
  double target = 0.0;  // (1/n) sum v_i^2 sigma^2
  double exact = 0.0;   // E[HCK meat | design], including the partialling of x
};

// Monte Carlo mean of the HCK meat at a fixed one-way fixed effects design
// with homoskedastic errors of variance sigma2.
MeatAverage average_hck_meat(Index units, int reps, std::uint64_t seed) {
  const double sigma2 = 4.0;
  PanelFixture p = panel_fixture(units, 3, false, seed);
  const Index n = p.data.n();
  auto rep = test::make_rep(p.data.w);
  RandomStream rng(seed, 5);
  MeatAverage out;
  double sum = 0.0, sum2 = 0.0;
  Vector v_hat;
  for (int s = 0; s < reps; ++s) {
    for (Index i = 0; i < n; ++i) p.data.y(i) = p.data.x(i, 0) + std::sqrt(sigma2) * rng.normal();
    const PartialledFit fit = fit_partialled(p.data, rep);
    if (s == 0) v_hat = fit.v_hat.col(0);
    const double m = meat_hck(fit).sigma_mat(0, 0);
    sum += m;
    sum2 += m * m;
  }
  out.mean = sum / reps;
  out.se = std::sqrt((sum2 / reps - out.mean * out.mean) / reps);
  const double nn = static_cast<double>(n);
  out.target = v_hat.squaredNorm() / nn * sigma2;
  // u_hat = (M - P_v) u, so E[u_hat^2] = sigma2 (diag M - p) with
  // p_i = v_i^2 / |v|^2, and E[u_tilde^2] = sigma2 (1 - (M (*) M)^{-1} p).
  const Vector p_diag = v_hat.array().square().matrix() / v_hat.squaredNorm();
  const Vector correction = solve_kappa_system(*rep, p_diag);
  out.exact = sigma2 / nn * (v_hat.squaredNorm() - v_hat.array().square().matrix().dot(correction));
  return out;
}

}  // namespace

TEST_CASE("HCK meat matches its exact conditional expectation") {
  // n = 120: the partialling of x shifts the expectation by O(d/n) below the
  // target; the Monte Carlo mean must match the exact value.
  const MeatAverage a = average_hck_meat(40, 20000, 13);
  MESSAGE("n=120: mean/target " << a.mean / a.target << ", exact/target " << a.exact / a.target);
  CHECK(std::abs(a.mean - a.exact) <= 4.0 * a.se);
}

TEST_CASE("HCK meat is conditionally unbiased at a fixed T = 3 design") {
  // S = 20,000 replications at n = 600: the average HCK meat is within 2% of
  // (1/n) sum v_i^2 sigma^2.
  const MeatAverage a = average_hck_meat(200, 20000, 15);
  MESSAGE("n=600: mean/target " << a.mean / a.target << ", exact/target " << a.exact / a.target);
  CHECK(std::abs(a.mean / a.target - 1.0) < 0.02);
}

TEST_CASE("bias-corrected squared residuals are unbiased index by index") {
  // Heteroskedastic fixed design; every index within 5 Monte Carlo standard
  // errors of its known variance.
  PanelFixture p = panel_fixture(40, 3, true, 14);
  const Index n = p.data.n();
  const AnnihilatorRep rep = annihilator(p.data.w);
  const int reps = 20000;
  Vector sum = Vector::Zero(n), sum2 = Vector::Zero(n);
  RandomStream rng(14, 5);
  for (int s = 0; s < reps; ++s) {
    Vector e(n);
    for (Index i = 0; i < n; ++i) e(i) = p.sigma(i) * rng.normal();
    const Vector u_hat = rep.m * e;
    const Vector ut = solve_kappa_system(rep, u_hat.array().square().matrix());
    sum += ut;
    sum2 += ut.array().square().matrix();
  }
  int outside = 0;
  for (Index i = 0; i < n; ++i) {
    const double mean = sum(i) / reps;
    const double se = std::sqrt((sum2(i) / reps - mean * mean) / reps);
    if (std::abs(mean - p.sigma(i) * p.sigma(i)) > 5.0 * se) ++outside;
  }
  CHECK(outside == 0);
}
