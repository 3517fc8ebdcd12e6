#include "survsim/cox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "survsim/errors.hpp"
#include "survsim/kernels.hpp"
#include "survsim/stats.hpp"

namespace survsim {

namespace {

// Relative linear predictors below max - kEtaClamp carry relative risk
// exp(-250) and are clamped so that risk-set sums and their reciprocals stay
// inside double range in degenerate regimes.
constexpr double kEtaClamp = 250.0;

// |beta| on the standardized scale beyond which the likelihood is treated as
// monotone (the documented small-alpha failure mode).
constexpr double kDivergenceThreshold = 50.0;

double eta_max(const std::vector<double>& eta) {
  double m = -std::numeric_limits<double>::infinity();
  for (double e : eta) {
    if (!std::isfinite(e)) throw GenerationError("cox: non-finite linear predictor");
    m = std::max(m, e);
  }
  return m;
}

inline double rel_risk(double eta_i, double m) {
  return std::exp(std::max(eta_i - m, -kEtaClamp));
}

}  // namespace

std::size_t SurvResponse::n_events() const {
  return static_cast<std::size_t>(std::count(status.begin(), status.end(), std::uint8_t{1}));
}

void SurvResponse::validate() const {
  if (time.size() != status.size())
    throw InvalidParameterError("SurvResponse: time/status length mismatch");
  if (n_events() == 0)
    throw NonIdentifiableError("SurvResponse: no events, partial likelihood is void");
  for (double t : time) {
    if (!(t > 0.0) || !std::isfinite(t))
      throw InvalidParameterError("SurvResponse: times must be positive and finite");
  }
}

CoxOrdering CoxOrdering::make(const SurvResponse& resp) {
  const std::size_t n = resp.n();
  CoxOrdering ord;
  ord.order.resize(n);
  std::iota(ord.order.begin(), ord.order.end(), std::size_t{0});
  std::sort(ord.order.begin(), ord.order.end(), [&](std::size_t a, std::size_t b) {
    if (resp.time[a] != resp.time[b]) return resp.time[a] > resp.time[b];
    return a < b;
  });
  ord.blocks.push_back(0);
  for (std::size_t k = 1; k < n; ++k) {
    if (resp.time[ord.order[k]] != resp.time[ord.order[k - 1]]) ord.blocks.push_back(k);
  }
  ord.blocks.push_back(n);
  ord.n_events = resp.n_events();
  return ord;
}

double cox_partial_loglik(const CoxOrdering& ord, const SurvResponse& resp,
                          const std::vector<double>& eta) {
  const double m = eta_max(eta);
  double s0 = 0.0;
  double ll = 0.0;
  for (std::size_t b = 0; b + 1 < ord.blocks.size(); ++b) {
    std::size_t d = 0;
    double eta_events = 0.0;
    for (std::size_t k = ord.blocks[b]; k < ord.blocks[b + 1]; ++k) {
      const std::size_t i = ord.order[k];
      s0 += rel_risk(eta[i], m);
      if (resp.status[i]) {
        ++d;
        eta_events += std::max(eta[i] - m, -kEtaClamp);
      }
    }
    if (d > 0) ll += eta_events - static_cast<double>(d) * std::log(s0);
  }
  return ll;
}

double cox_partial_loglik(const std::vector<double>& beta, const Matrix& design,
                          const SurvResponse& resp) {
  resp.validate();
  if (beta.size() != design.cols())
    throw InvalidParameterError("cox_partial_loglik: beta length mismatch");
  const std::size_t n = design.rows();
  std::vector<double> eta(n, 0.0);
  for (std::size_t j = 0; j < beta.size(); ++j) {
    if (beta[j] != 0.0) kernels::axpy(beta[j], design.col(j), eta.data(), n);
  }
  return cox_partial_loglik(CoxOrdering::make(resp), resp, eta);
}

double cox_loglik_eta_derivs(const CoxOrdering& ord, const SurvResponse& resp,
                             const std::vector<double>& eta, double* grad, double* hess_diag) {
  const double m = eta_max(eta);

  // First pass (descending time): risk sums and per-block cumulative event
  // terms sum_t d_t/S0(t) and sum_t d_t/S0(t)^2. Relative risks are parked in
  // grad so the second pass does not recompute exp().
  const std::size_t n_blocks = ord.blocks.size() - 1;
  std::vector<double> cum_a(n_blocks + 1, 0.0), cum_b(n_blocks + 1, 0.0);
  double s0 = 0.0;
  double ll = 0.0;
  for (std::size_t b = 0; b < n_blocks; ++b) {
    std::size_t d = 0;
    double eta_events = 0.0;
    for (std::size_t k = ord.blocks[b]; k < ord.blocks[b + 1]; ++k) {
      const std::size_t i = ord.order[k];
      const double r = rel_risk(eta[i], m);
      grad[i] = r;
      s0 += r;
      if (resp.status[i]) {
        ++d;
        eta_events += std::max(eta[i] - m, -kEtaClamp);
      }
    }
    const double dd = static_cast<double>(d);
    cum_a[b + 1] = cum_a[b] + dd / s0;
    cum_b[b + 1] = cum_b[b] + dd / (s0 * s0);
    if (d > 0) ll += eta_events - dd * std::log(s0);
  }

  // A subject entering at block b sits in the risk set of every event block
  // >= b, so its cumulative terms run from b's own events to the end.
  for (std::size_t b = 0; b < n_blocks; ++b) {
    const double a_tail = cum_a[n_blocks] - cum_a[b];
    const double b_tail = cum_b[n_blocks] - cum_b[b];
    for (std::size_t k = ord.blocks[b]; k < ord.blocks[b + 1]; ++k) {
      const std::size_t i = ord.order[k];
      const double r = grad[i];
      grad[i] = (resp.status[i] ? 1.0 : 0.0) - r * a_tail;
      hess_diag[i] = r * a_tail - r * r * b_tail;
    }
  }
  return ll;
}

// One sweep producing loglik, gradient and full information matrix on the
// given design.
double cox_loglik_score_info(const CoxOrdering& ord, const SurvResponse& resp, const Matrix& x,
                             const std::vector<double>& eta, std::vector<double>& score,
                             Matrix& info) {
  const std::size_t p = x.cols();
  const std::size_t n_blocks = ord.blocks.size() - 1;
  const double m = eta_max(eta);

  std::fill(score.begin(), score.end(), 0.0);
  info = Matrix(p, p);

  double s0 = 0.0;
  std::vector<double> s1(p, 0.0);
  Matrix s2(p, p);
  std::vector<double> xbar(p), xrow(p);
  double ll = 0.0;

  for (std::size_t b = 0; b < n_blocks; ++b) {
    std::size_t d = 0;
    double eta_events = 0.0;
    for (std::size_t k = ord.blocks[b]; k < ord.blocks[b + 1]; ++k) {
      const std::size_t i = ord.order[k];
      const double r = rel_risk(eta[i], m);
      s0 += r;
      // gather the row once; the rank-1 update then runs on contiguous data
      for (std::size_t a = 0; a < p; ++a) xrow[a] = x(i, a);
      for (std::size_t a = 0; a < p; ++a) {
        const double ra = r * xrow[a];
        s1[a] += ra;
        double* s2a = s2.col(a);  // symmetric: fill lower triangle by column
        for (std::size_t c = 0; c <= a; ++c) s2a[c] += ra * xrow[c];
      }
      if (resp.status[i]) {
        ++d;
        eta_events += std::max(eta[i] - m, -kEtaClamp);
        for (std::size_t a = 0; a < p; ++a) score[a] += xrow[a];
      }
    }
    if (d == 0) continue;
    const double dd = static_cast<double>(d);
    ll += eta_events - dd * std::log(s0);
    for (std::size_t a = 0; a < p; ++a) xbar[a] = s1[a] / s0;
    for (std::size_t a = 0; a < p; ++a) {
      score[a] -= dd * xbar[a];
      const double* s2a = s2.col(a);
      for (std::size_t c = 0; c <= a; ++c) {
        info(a, c) += dd * (s2a[c] / s0 - xbar[a] * xbar[c]);
      }
    }
  }
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t c = 0; c < a; ++c) info(c, a) = info(a, c);
  }
  return ll;
}

FitSummary fit_cox_nr(const Matrix& design, const SurvResponse& resp, double tol,
                      std::size_t max_iter) {
  resp.validate();
  const std::size_t n = design.rows();
  const std::size_t p = design.cols();
  if (p < 1) throw InvalidParameterError("fit_cox_nr: design has no columns");
  if (n != resp.n()) throw InvalidParameterError("fit_cox_nr: design/response size mismatch");
  if (resp.n_events() < p + 1)
    throw InsufficientDataError("fit_cox_nr: fewer events than coefficients + 1");

  // Standardized columns; coefficients are mapped back at the end.
  Matrix x(n, p);
  std::vector<double> mean(p), sd(p);
  for (std::size_t j = 0; j < p; ++j) {
    mean[j] = kernels::sum(design.col(j), n) / static_cast<double>(n);
    sd[j] = std::sqrt(kernels::centered_sumsq(design.col(j), n, mean[j]) / static_cast<double>(n));
    if (sd[j] == 0.0) {
      throw NonIdentifiableError("fit_cox_nr: column " + std::to_string(j) +
                                 " is constant, likelihood is flat");
    }
    double* xj = x.col(j);
    const double* dj = design.col(j);
    for (std::size_t i = 0; i < n; ++i) xj[i] = (dj[i] - mean[j]) / sd[j];
  }

  const CoxOrdering ord = CoxOrdering::make(resp);

  std::vector<double> beta(p, 0.0), eta(n, 0.0), grad(p), step(p);
  Matrix info(p, p);
  double ll = cox_loglik_score_info(ord, resp, x, eta, grad, info);
  bool converged = false;

  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    double gmax = 0.0;
    for (double g : grad) gmax = std::max(gmax, std::fabs(g));
    if (gmax < tol) {
      converged = true;
      break;
    }
    Matrix chol = info;
    if (!cholesky_lower(chol)) {
      throw SingularityError("fit_cox_nr: singular information matrix");
    }
    cholesky_solve(chol, grad.data(), step.data());

    double scale = 1.0;
    std::vector<double> beta_new(p), eta_new(n), grad_new(p);
    Matrix info_new(p, p);
    double ll_new = ll;
    bool accepted = false;
    for (int h = 0; h < 30; ++h) {
      for (std::size_t j = 0; j < p; ++j) beta_new[j] = beta[j] + scale * step[j];
      eta_new.assign(n, 0.0);
      for (std::size_t j = 0; j < p; ++j) {
        if (beta_new[j] != 0.0) kernels::axpy(beta_new[j], x.col(j), eta_new.data(), n);
      }
      ll_new = cox_loglik_score_info(ord, resp, x, eta_new, grad_new, info_new);
      if (ll_new >= ll - 1e-12 * (std::fabs(ll) + 1.0)) {
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    if (!accepted) break;
    beta = beta_new;
    eta = eta_new;
    grad = grad_new;
    info = info_new;
    ll = ll_new;

    for (std::size_t j = 0; j < p; ++j) {
      if (std::fabs(beta[j]) > kDivergenceThreshold) {
        throw DivergenceError("fit_cox_nr: coefficient for column " + std::to_string(j) +
                              " is diverging (monotone likelihood)");
      }
    }
  }
  Matrix chol = info;
  if (!cholesky_lower(chol)) {
    throw SingularityError("fit_cox_nr: singular information matrix at the optimum");
  }
  const Matrix cov = cholesky_invert(chol);

  FitSummary fit;
  fit.coef.resize(p);
  fit.se.resize(p);
  fit.p_value.resize(p);
  fit.converged = converged;
  fit.n_used = n;
  for (std::size_t j = 0; j < p; ++j) {
    fit.coef[j] = beta[j] / sd[j];
    fit.se[j] = std::sqrt(cov(j, j)) / sd[j];
    fit.p_value[j] = two_sided_normal_p(beta[j] / std::sqrt(cov(j, j)));
  }
  return fit;
}

}  // namespace survsim
