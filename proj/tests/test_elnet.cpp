#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "survsim/elnet.hpp"
#include "survsim/errors.hpp"
#include "survsim/glm.hpp"
#include "survsim/kernels.hpp"
#include "survsim/sim.hpp"
#include "test_util.hpp"

using namespace survsim;

namespace {

struct Std {
  Matrix xs;
  std::vector<double> mean, sd;
};

Std standardize(const Matrix& x) {
  Std out;
  const std::size_t n = x.rows(), p = x.cols();
  out.xs = Matrix(n, p);
  out.mean.resize(p);
  out.sd.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    out.mean[j] = kernels::sum(x.col(j), n) / n;
    out.sd[j] = std::sqrt(kernels::centered_sumsq(x.col(j), n, out.mean[j]) / n);
    for (std::size_t i = 0; i < n; ++i) out.xs(i, j) = (x(i, j) - out.mean[j]) / out.sd[j];
  }
  return out;
}

struct GaussianProblem {
  Matrix x;
  std::vector<double> y;
};

GaussianProblem gaussian_problem(RandomStream& s, std::size_t n, std::size_t p, double rho) {
  GaussianProblem prob;
  prob.x = sample_mvn(n, p, rho, s);
  prob.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double signal = 0.0;
    for (std::size_t j = 0; j < std::min<std::size_t>(p, 3); ++j) {
      signal += (j + 1.0) * prob.x(i, j);
    }
    prob.y[i] = signal + s.normal();
  }
  return prob;
}

struct CoxProblem {
  Matrix x;
  SurvResponse resp;
};

CoxProblem cox_problem(RandomStream& s, std::size_t n, std::size_t p, double rho,
                       double censor) {
  CoxProblem prob;
  prob.x = sample_mvn(n, p, rho, s);
  std::vector<double> beta(p, 0.0);
  for (std::size_t j = 0; j < std::min<std::size_t>(p, 3); ++j) beta[j] = 0.5 * (j + 1);
  const auto t = gen_survival_times(prob.x, beta, {2.0, 4.0}, s);
  auto [obs, st] = apply_censoring(t, censor, s);
  prob.resp = {std::move(obs), std::move(st)};
  return prob;
}

}  // namespace

TEST_CASE("lambda path: log-spaced grid with pinned endpoints") {
  RandomStream s(40);
  const GaussianProblem prob = gaussian_problem(s, 100, 5, 0.0);
  const auto grid = lambda_path(prob.x, prob.y, 1.0, 100, 0.01);
  REQUIRE(grid.size() == 100);
  const double ratio = grid[1] / grid[0];
  for (std::size_t i = 1; i < grid.size(); ++i) {
    CHECK(testutil::close_rel(grid[i] / grid[i - 1], ratio, 1e-10));
  }
  CHECK(testutil::close_rel(grid.back(), grid.front() * 0.01, 1e-12));
}

TEST_CASE("lambda path: everything is zero at lambda_max (gaussian)") {
  RandomStream s(41);
  const GaussianProblem prob = gaussian_problem(s, 120, 6, 0.3);
  for (double mix : {1.0, 0.5}) {
    const auto grid = lambda_path(prob.x, prob.y, mix, 100, 0.01);
    PenaltySpec spec;
    spec.mix = mix;
    spec.lambda = grid.front();
    const auto coef = fit_gaussian_elnet(prob.x, prob.y, spec);
    for (std::size_t j = 1; j < coef.size(); ++j) CHECK(coef[j] == 0.0);
    // and strictly below lambda_max something activates
    spec.lambda = grid.front() * 0.9;
    const auto coef2 = fit_gaussian_elnet(prob.x, prob.y, spec);
    bool any = false;
    for (std::size_t j = 1; j < coef2.size(); ++j) any = any || coef2[j] != 0.0;
    CHECK(any);
  }
}

TEST_CASE("lambda path: all-zero design is degenerate") {
  Matrix x(20, 2);
  const std::vector<double> y(20, 1.5);
  CHECK_THROWS_AS(lambda_path(x, y, 1.0, 100, 0.01), DegeneratePathError);
}

TEST_CASE("gaussian elnet: lambda = 0 matches least squares") {
  RandomStream s(42);
  const GaussianProblem prob = gaussian_problem(s, 100, 8, 0.3);
  PenaltySpec spec;
  spec.lambda = 0.0;
  const auto coef = fit_gaussian_elnet(prob.x, prob.y, spec, 1e-10);
  const FitSummary ols = fit_ols(prob.x, prob.y);
  for (std::size_t j = 0; j < coef.size(); ++j) {
    CHECK(testutil::close(coef[j], ols.coef[j], 1e-6));
  }
}

TEST_CASE("gaussian elnet: KKT conditions at random penalties") {
  RandomStream s(43);
  for (int rep = 0; rep < 10; ++rep) {
    const GaussianProblem prob = gaussian_problem(s, 80, 6, 0.4);
    const double mix = rep % 2 ? 1.0 : 0.6;
    const auto grid = lambda_path(prob.x, prob.y, mix, 100, 0.01);
    const double lambda = grid[10 + 7 * rep % 80];
    PenaltySpec spec;
    spec.mix = mix;
    spec.lambda = lambda;
    const auto coef = fit_gaussian_elnet(prob.x, prob.y, spec, 1e-10);

    // re-derive the standardized solution and check subgradient stationarity
    const Std sx = standardize(prob.x);
    const std::size_t n = prob.x.rows(), p = prob.x.cols();
    const double ybar = kernels::sum(prob.y.data(), n) / n;
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = prob.y[i] - ybar;
    std::vector<double> bstd(p);
    for (std::size_t j = 0; j < p; ++j) {
      bstd[j] = coef[j + 1] * sx.sd[j];
      if (bstd[j] != 0.0) kernels::axpy(-bstd[j], sx.xs.col(j), r.data(), n);
    }
    for (std::size_t j = 0; j < p; ++j) {
      const double score = kernels::dot(sx.xs.col(j), r.data(), n) / n;
      if (bstd[j] != 0.0) {
        const double resid = score - lambda * (1.0 - mix) * bstd[j] -
                             lambda * mix * (bstd[j] > 0 ? 1.0 : -1.0);
        CHECK(std::fabs(resid) < 1e-6);
      } else {
        CHECK(std::fabs(score) <= lambda * mix + 1e-6);
      }
    }
  }
}

TEST_CASE("gaussian elnet: standardization round-trip under column scaling") {
  RandomStream s(44);
  GaussianProblem prob = gaussian_problem(s, 90, 4, 0.0);
  PenaltySpec spec;
  spec.lambda = 0.12;
  const auto base = fit_gaussian_elnet(prob.x, prob.y, spec, 1e-10);
  const double c = 40.0;
  for (std::size_t i = 0; i < 90; ++i) prob.x(i, 2) *= c;
  const auto scaled = fit_gaussian_elnet(prob.x, prob.y, spec, 1e-10);
  CHECK(testutil::close(scaled[3] * c, base[3], 1e-8));
  CHECK(testutil::close(scaled[1], base[1], 1e-8));
  CHECK(testutil::close(scaled[0], base[0], 1e-8));
}

TEST_CASE("gaussian elnet: unpenalized columns stay unshrunk") {
  RandomStream s(45);
  const GaussianProblem prob = gaussian_problem(s, 150, 4, 0.0);
  PenaltySpec spec;
  spec.lambda = 5.0;  // wipes out the penalized part
  spec.penalize_mask = {1, 1, 1, 0};
  const auto coef = fit_gaussian_elnet(prob.x, prob.y, spec, 1e-10);
  CHECK(coef[1] == 0.0);
  CHECK(coef[2] == 0.0);
  CHECK(coef[3] == 0.0);
  CHECK(coef[4] != 0.0);
}

TEST_CASE("cox elnet: full shrinkage at lambda_max") {
  RandomStream s(46);
  const CoxProblem prob = cox_problem(s, 150, 5, 0.3, 0.2);
  const auto grid = lambda_path(prob.x, prob.resp, 1.0, 100, 0.01);
  PenaltySpec spec;
  spec.lambda = grid.front();
  const auto coef = fit_cox_elnet(prob.x, prob.resp, spec);
  for (double c : coef) CHECK(c == 0.0);
}

TEST_CASE("cox elnet: lambda = 0 matches the Newton-Raphson fit") {
  RandomStream s(47);
  const CoxProblem prob = cox_problem(s, 200, 3, 0.3, 0.2);
  PenaltySpec spec;
  spec.lambda = 0.0;
  const auto coef = fit_cox_elnet(prob.x, prob.resp, spec, 1e-9);
  const FitSummary nr = fit_cox_nr(prob.x, prob.resp, 1e-11);
  REQUIRE(nr.converged);
  for (std::size_t j = 0; j < 3; ++j) CHECK(testutil::close(coef[j], nr.coef[j], 1e-4));
}

TEST_CASE("cox elnet: KKT conditions at a path point") {
  RandomStream s(48);
  for (int rep = 0; rep < 5; ++rep) {
    const CoxProblem prob = cox_problem(s, 120, 6, 0.4, 0.2);
    const double mix = rep % 2 ? 1.0 : 0.7;
    const auto grid = lambda_path(prob.x, prob.resp, mix, 100, 0.01);
    const double lambda = grid[15 + 11 * rep];
    PenaltySpec spec;
    spec.mix = mix;
    spec.lambda = lambda;
    const auto coef = fit_cox_elnet(prob.x, prob.resp, spec, 1e-9);

    const Std sx = standardize(prob.x);
    const std::size_t n = prob.x.rows(), p = prob.x.cols();
    std::vector<double> bstd(p), eta(n, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
      bstd[j] = coef[j] * sx.sd[j];
      if (bstd[j] != 0.0) kernels::axpy(bstd[j], sx.xs.col(j), eta.data(), n);
    }
    const CoxOrdering ord = CoxOrdering::make(prob.resp);
    std::vector<double> g(n), h(n);
    cox_loglik_eta_derivs(ord, prob.resp, eta, g.data(), h.data());
    for (std::size_t j = 0; j < p; ++j) {
      const double score = kernels::dot(sx.xs.col(j), g.data(), n) / n;
      if (bstd[j] != 0.0) {
        const double resid = score - lambda * (1.0 - mix) * bstd[j] -
                             lambda * mix * (bstd[j] > 0 ? 1.0 : -1.0);
        CHECK(std::fabs(resid) < 1e-5);
      } else {
        CHECK(std::fabs(score) <= lambda * mix + 1e-5);
      }
    }
  }
}

TEST_CASE("cox elnet: path coefficients move smoothly (warm-start smoke)") {
  RandomStream s(49);
  const CoxProblem prob = cox_problem(s, 150, 5, 0.3, 0.2);
  const CoxCvFit fit = cox_elnet_cv_fit(prob.x, prob.resp, 1.0, 5, RandomStream(99));
  const std::size_t m = fit.cv.lambda_grid.size();
  std::vector<double> jumps;
  for (std::size_t li = 1; li < m; ++li) {
    double jump = 0.0;
    for (std::size_t j = 0; j < 5; ++j) {
      jump = std::max(jump, std::fabs(fit.path_coefs(j, li) - fit.path_coefs(j, li - 1)));
    }
    if (jump > 0.0) jumps.push_back(jump);
  }
  REQUIRE(!jumps.empty());
  std::sort(jumps.begin(), jumps.end());
  const double median = jumps[jumps.size() / 2];
  CHECK(jumps.back() <= 10.0 * median);
}

TEST_CASE("cv: lambda_1se is never below lambda_min and folds are deterministic") {
  RandomStream s(50);
  const GaussianProblem gp = gaussian_problem(s, 100, 6, 0.3);
  const CvResult g1 = cv_select_lambda(gp.x, gp.y, 1.0, 10, RandomStream(1234));
  const CvResult g2 = cv_select_lambda(gp.x, gp.y, 1.0, 10, RandomStream(1234));
  CHECK(g1.lambda_1se >= g1.lambda_min);
  CHECK(g1.fold_assignment == g2.fold_assignment);
  CHECK(g1.lambda_min == g2.lambda_min);
  CHECK(g1.lambda_1se == g2.lambda_1se);

  const CoxProblem cp = cox_problem(s, 100, 5, 0.3, 0.3);
  const CvResult c1 = cv_select_lambda(cp.x, cp.resp, 1.0, 10, RandomStream(77));
  const CvResult c2 = cv_select_lambda(cp.x, cp.resp, 1.0, 10, RandomStream(77));
  CHECK(c1.lambda_1se >= c1.lambda_min);
  CHECK(c1.fold_assignment == c2.fold_assignment);
  CHECK(c1.lambda_min == c2.lambda_min);
  CHECK(c1.lambda_1se == c2.lambda_1se);

  // fold sizes near-equal: remainder spread one per fold
  std::vector<int> sizes(10, 0);
  for (auto f : g1.fold_assignment) ++sizes[f];
  const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
  CHECK(*hi - *lo <= 1);
}

TEST_CASE("cv: pure-noise gaussian response shrinks to at most one feature") {
  RandomStream s(51);
  int small_support = 0;
  const int reps = 200;
  for (int rep = 0; rep < reps; ++rep) {
    Matrix x = testutil::random_matrix(s, 60, 8);
    std::vector<double> y(60);
    for (auto& v : y) v = s.normal();
    const CvResult cv = cv_select_lambda(x, y, 1.0, 5, s.fork(rep));
    PenaltySpec spec;
    spec.lambda = cv.lambda_1se;
    const auto coef = fit_gaussian_elnet(x, y, spec);
    int nonzero = 0;
    for (std::size_t j = 1; j < coef.size(); ++j) nonzero += coef[j] != 0.0 ? 1 : 0;
    if (nonzero <= 1) ++small_support;
  }
  CHECK(small_support >= reps * 9 / 10);
}

TEST_CASE("cv: a fold that can never hold an event fails after retries") {
  RandomStream s(52);
  Matrix x = testutil::random_matrix(s, 20, 2);
  SurvResponse resp;
  resp.time.resize(20);
  resp.status.assign(20, 0);
  for (int i = 0; i < 20; ++i) resp.time[i] = 1.0 + i;
  resp.status[3] = 1;  // single event: one fold always misses it
  CHECK_THROWS_AS(cv_select_lambda(x, resp, 1.0, 2, RandomStream(5)), FoldFailureError);
}

TEST_CASE("penalty spec validation") {
  PenaltySpec spec;
  spec.mix = 0.0;
  CHECK_THROWS_AS(spec.validate(3), InvalidParameterError);
  spec.mix = 0.5;
  spec.lambda = -1.0;
  CHECK_THROWS_AS(spec.validate(3), InvalidParameterError);
  spec.lambda = 0.1;
  spec.penalize_mask = {1, 0};
  CHECK_THROWS_AS(spec.validate(3), InvalidParameterError);
  spec.penalize_mask = {1, 0, 1};
  CHECK_NOTHROW(spec.validate(3));
}
