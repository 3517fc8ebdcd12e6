#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "survsim/cox.hpp"
#include "survsim/errors.hpp"
#include "survsim/sim.hpp"
#include "test_util.hpp"

using namespace survsim;

namespace {

// Quadratic-cost oracle: for every event, sum over the full at-risk set.
double loglik_oracle(const std::vector<double>& beta, const Matrix& x, const SurvResponse& resp) {
  const std::size_t n = x.rows(), p = x.cols();
  auto eta = [&](std::size_t i) {
    double e = 0;
    for (std::size_t j = 0; j < p; ++j) e += x(i, j) * beta[j];
    return e;
  };
  double ll = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!resp.status[i]) continue;
    double denom = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (resp.time[j] >= resp.time[i]) denom += std::exp(eta(j));
    }
    ll += eta(i) - std::log(denom);
  }
  return ll;
}

SurvResponse small_response() {
  // includes one tied event pair to exercise the Breslow path
  return {{3.0, 1.0, 4.0, 1.0, 2.5}, {1, 1, 0, 1, 1}};
}

Matrix small_design() {
  Matrix x(5, 2);
  const double vals[5][2] = {{0.5, -1.0}, {-0.2, 0.3}, {1.4, 0.0}, {0.0, 1.1}, {-0.7, -0.4}};
  for (int i = 0; i < 5; ++i) {
    x(i, 0) = vals[i][0];
    x(i, 1) = vals[i][1];
  }
  return x;
}

// Simulated Cox data with moderate effects.
struct CoxProblem {
  Matrix x;
  SurvResponse resp;
};

CoxProblem simulate(std::size_t n, std::size_t p, double censor, RandomStream& s) {
  CoxProblem prob;
  prob.x = testutil::random_matrix(s, n, p);
  std::vector<double> beta(p);
  for (std::size_t j = 0; j < p; ++j) beta[j] = (j % 2 ? -0.8 : 1.0);
  const auto t = gen_survival_times(prob.x, beta, {1.5, 2.0}, s);
  auto [obs, st] = apply_censoring(t, censor, s);
  prob.resp = {std::move(obs), std::move(st)};
  return prob;
}

}  // namespace

TEST_CASE("partial loglik: null model equals minus sum of log risk-set sizes") {
  const SurvResponse resp = small_response();
  const Matrix x = small_design();
  // events at t=3,1,1,2.5; risk sets of sizes 2,5,5,3 (times >= t)
  const double expected = -(std::log(2.0) + 2.0 * std::log(5.0) + std::log(3.0));
  CHECK(testutil::close(cox_partial_loglik({0.0, 0.0}, x, resp), expected, 1e-12));
}

TEST_CASE("partial loglik: matches the double-loop oracle, ties included") {
  const SurvResponse resp = small_response();
  const Matrix x = small_design();
  for (const auto& beta : std::vector<std::vector<double>>{
           {0.3, -0.6}, {1.2, 0.8}, {-2.0, 0.1}, {0.0, 5.0}}) {
    CHECK(testutil::close(cox_partial_loglik(beta, x, resp), loglik_oracle(beta, x, resp), 1e-12));
  }
}

TEST_CASE("partial loglik: location invariance per column") {
  RandomStream s(30);
  CoxProblem prob = simulate(60, 2, 0.2, s);
  const std::vector<double> beta{0.7, -0.4};
  const double base = cox_partial_loglik(beta, prob.x, prob.resp);
  for (std::size_t i = 0; i < 60; ++i) prob.x(i, 0) += 17.5;
  CHECK(testutil::close(cox_partial_loglik(beta, prob.x, prob.resp), base, 1e-10));
}

TEST_CASE("fit: single covariate matches a grid-search maximizer") {
  RandomStream s(31);
  Matrix x(8, 1);
  SurvResponse resp;
  resp.time = {0.8, 2.1, 0.5, 3.3, 1.2, 0.9, 2.8, 1.7};
  resp.status = {1, 0, 1, 1, 1, 0, 1, 1};
  const double xv[8] = {0.3, -1.2, 0.8, -0.5, 1.9, 0.2, -0.9, 1.1};
  for (int i = 0; i < 8; ++i) x(i, 0) = xv[i];

  const FitSummary fit = fit_cox_nr(x, resp);
  REQUIRE(fit.converged);

  const CoxOrdering ord = CoxOrdering::make(resp);
  double best_beta = 0.0, best_ll = -1e300;
  std::vector<double> eta(8);
  for (double b = -20.0; b <= 20.0; b += 5e-4) {
    for (int i = 0; i < 8; ++i) eta[i] = b * x(i, 0);
    const double ll = cox_partial_loglik(ord, resp, eta);
    if (ll > best_ll) {
      best_ll = ll;
      best_beta = b;
    }
  }
  CHECK(testutil::close(fit.coef[0], best_beta, 1e-3));
}

TEST_CASE("fit: constant covariate is non-identifiable") {
  SurvResponse resp = small_response();
  Matrix x(5, 1);
  for (int i = 0; i < 5; ++i) x(i, 0) = 3.0;
  CHECK_THROWS_AS(fit_cox_nr(x, resp), NonIdentifiableError);
}

TEST_CASE("fit: standard errors match the finite-difference Hessian") {
  RandomStream s(32);
  const CoxProblem prob = simulate(50, 2, 0.2, s);
  const FitSummary fit = fit_cox_nr(prob.x, prob.resp, 1e-11);
  REQUIRE(fit.converged);

  // central-difference Hessian of the log partial likelihood at the optimum
  const double h = 1e-4;
  Matrix hess(2, 2);
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t b = 0; b < 2; ++b) {
      std::vector<double> bpp = fit.coef, bpm = fit.coef, bmp = fit.coef, bmm = fit.coef;
      bpp[a] += h; bpp[b] += h;
      bpm[a] += h; bpm[b] -= h;
      bmp[a] -= h; bmp[b] += h;
      bmm[a] -= h; bmm[b] -= h;
      hess(a, b) = (cox_partial_loglik(bpp, prob.x, prob.resp) -
                    cox_partial_loglik(bpm, prob.x, prob.resp) -
                    cox_partial_loglik(bmp, prob.x, prob.resp) +
                    cox_partial_loglik(bmm, prob.x, prob.resp)) /
                   (4.0 * h * h);
    }
  }
  // diagonal of [-H]^{-1}; in 2-d det(-H) = det(H)
  const double det = hess(0, 0) * hess(1, 1) - hess(0, 1) * hess(1, 0);
  const double v0 = -hess(1, 1) / det;
  const double v1 = -hess(0, 0) / det;
  CHECK(testutil::close_rel(fit.se[0], std::sqrt(v0), 1e-4));
  CHECK(testutil::close_rel(fit.se[1], std::sqrt(v1), 1e-4));
}

TEST_CASE("fit: rescaling a column rescales its coefficient, z unchanged") {
  RandomStream s(33);
  CoxProblem prob = simulate(80, 2, 0.1, s);
  const FitSummary a = fit_cox_nr(prob.x, prob.resp);
  const double c = 250.0;
  for (std::size_t i = 0; i < 80; ++i) prob.x(i, 1) *= c;
  const FitSummary b = fit_cox_nr(prob.x, prob.resp);
  CHECK(testutil::close_rel(b.coef[1], a.coef[1] / c, 1e-8));
  CHECK(testutil::close(a.coef[1] / a.se[1], b.coef[1] / b.se[1], 1e-8));
  CHECK(testutil::close(a.coef[0], b.coef[0], 1e-7));
}

TEST_CASE("fit: monotone likelihood raises the divergence error") {
  Matrix x(20, 1);
  SurvResponse resp;
  resp.time.resize(20);
  resp.status.assign(20, 1);
  for (int i = 0; i < 20; ++i) {
    x(i, 0) = static_cast<double>(i);
    resp.time[i] = 100.0 - i;  // largest covariate fails first, always
  }
  CHECK_THROWS_AS(fit_cox_nr(x, resp), DivergenceError);
}

TEST_CASE("fit: no events / too few events") {
  Matrix x(5, 1);
  for (int i = 0; i < 5; ++i) x(i, 0) = i;
  SurvResponse none{{1, 2, 3, 4, 5}, {0, 0, 0, 0, 0}};
  CHECK_THROWS_AS(fit_cox_nr(x, none), NonIdentifiableError);
  SurvResponse one{{1, 2, 3, 4, 5}, {0, 1, 0, 0, 0}};
  CHECK_THROWS_AS(fit_cox_nr(x, one), InsufficientDataError);
}

TEST_CASE("fit: p-values are two-sided normal") {
  RandomStream s(34);
  const CoxProblem prob = simulate(120, 3, 0.2, s);
  const FitSummary fit = fit_cox_nr(prob.x, prob.resp);
  for (std::size_t j = 0; j < 3; ++j) {
    const double z = fit.coef[j] / fit.se[j];
    CHECK(testutil::close(fit.p_value[j], std::erfc(std::fabs(z) / std::sqrt(2.0)), 1e-12));
  }
}
