#include "survsim/glm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "survsim/errors.hpp"
#include "survsim/kernels.hpp"
#include "survsim/stats.hpp"

namespace survsim {

namespace {

// |beta| on the standardized scale beyond which a logistic fit is treated as
// quasi-complete separation: Wald inference is meaningless out there.
constexpr double kSeparationThreshold = 30.0;

std::string design_col_name(std::size_t augmented_col) {
  if (augmented_col == 0) return "intercept";
  return "column " + std::to_string(augmented_col - 1);
}

double logistic_loglik(const std::vector<double>& eta, const std::vector<std::uint8_t>& y) {
  double ll = 0.0;
  for (std::size_t i = 0; i < eta.size(); ++i) {
    const double e = eta[i];
    // log(1 + exp(e)) without overflow
    const double log1pe = std::max(e, 0.0) + std::log1p(std::exp(-std::fabs(e)));
    ll += (y[i] ? e : 0.0) - log1pe;
  }
  return ll;
}

}  // namespace

FitSummary fit_ols(const Matrix& design, const std::vector<double>& response) {
  const std::size_t n = design.rows();
  const std::size_t p = design.cols();
  if (p < 1) throw InvalidParameterError("fit_ols: design has no columns");
  if (response.size() != n) throw InvalidParameterError("fit_ols: response length mismatch");
  if (n <= p + 1) throw InsufficientDataError("fit_ols: need n > p + 1 observations");

  Matrix x(n, p + 1);
  std::fill(x.col(0), x.col(0) + n, 1.0);
  for (std::size_t j = 0; j < p; ++j) {
    std::copy(design.col(j), design.col(j) + n, x.col(j + 1));
  }

  LeastSquaresFit ls = qr_least_squares(x, response);
  if (ls.rank_deficient) {
    throw NonIdentifiableError("fit_ols: design is rank deficient at " +
                               design_col_name(ls.deficient_col));
  }

  const double dof = static_cast<double>(n - p - 1);
  const double sigma2 = ls.rss / dof;
  const Matrix xtx_inv = rtr_inverse(ls.r);

  FitSummary fit;
  fit.coef = ls.coef;
  fit.se.resize(p + 1);
  fit.p_value.resize(p + 1);
  fit.n_used = n;
  for (std::size_t j = 0; j <= p; ++j) {
    fit.se[j] = std::sqrt(sigma2 * xtx_inv(j, j));
    if (fit.se[j] > 0.0) {
      fit.p_value[j] = two_sided_t_p(fit.coef[j] / fit.se[j], dof);
    } else {
      // exact fit: rss == 0
      fit.p_value[j] = fit.coef[j] == 0.0 ? 1.0 : 0.0;
    }
  }
  return fit;
}

FitSummary fit_logistic(const Matrix& design, const std::vector<std::uint8_t>& response,
                        std::size_t max_iter, double tol) {
  const std::size_t n = design.rows();
  const std::size_t p = design.cols();
  if (response.size() != n) throw InvalidParameterError("fit_logistic: response length mismatch");
  if (n <= p) throw InsufficientDataError("fit_logistic: need n > p observations");

  const auto n_pos = static_cast<std::size_t>(std::count(response.begin(), response.end(), 1));
  if (n_pos == 0 || n_pos == n) {
    throw NonIdentifiableError("fit_logistic: response contains a single class");
  }

  // Standardize covariates; coefficients are mapped back at the end.
  Matrix x(n, p + 1);
  std::fill(x.col(0), x.col(0) + n, 1.0);
  std::vector<double> mean(p), sd(p);
  for (std::size_t j = 0; j < p; ++j) {
    mean[j] = kernels::sum(design.col(j), n) / static_cast<double>(n);
    sd[j] = std::sqrt(kernels::centered_sumsq(design.col(j), n, mean[j]) / static_cast<double>(n));
    if (sd[j] == 0.0) {
      throw NonIdentifiableError("fit_logistic: column " + std::to_string(j) + " is constant");
    }
    double* xj = x.col(j + 1);
    const double* dj = design.col(j);
    for (std::size_t i = 0; i < n; ++i) xj[i] = (dj[i] - mean[j]) / sd[j];
  }

  std::vector<double> beta(p + 1, 0.0);
  std::vector<double> eta(n, 0.0), mu(n), w(n), grad(p + 1), step(p + 1);
  double ll = logistic_loglik(eta, response);
  bool converged = false;

  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      mu[i] = 1.0 / (1.0 + std::exp(-eta[i]));
      w[i] = mu[i] * (1.0 - mu[i]);
    }
    // gradient X^T (y - mu) and information X^T W X
    std::vector<double> resid(n);
    for (std::size_t i = 0; i < n; ++i) resid[i] = (response[i] ? 1.0 : 0.0) - mu[i];
    Matrix info(p + 1, p + 1);
    for (std::size_t j = 0; j <= p; ++j) {
      grad[j] = kernels::dot(x.col(j), resid.data(), n);
      for (std::size_t k = 0; k <= j; ++k) {
        info(j, k) = info(k, j) = kernels::wdot(w.data(), x.col(j), x.col(k), n);
      }
    }
    Matrix chol = info;
    if (!cholesky_lower(chol)) {
      throw SingularityError("fit_logistic: observed information is singular");
    }
    cholesky_solve(chol, grad.data(), step.data());

    // step-halving keeps the log-likelihood non-decreasing
    double scale = 1.0;
    std::vector<double> beta_new(p + 1), eta_new(n);
    double ll_new = ll;
    for (int h = 0; h < 30; ++h) {
      for (std::size_t j = 0; j <= p; ++j) beta_new[j] = beta[j] + scale * step[j];
      eta_new.assign(n, beta_new[0]);
      for (std::size_t j = 0; j < p; ++j) kernels::axpy(beta_new[j + 1], x.col(j + 1), eta_new.data(), n);
      ll_new = logistic_loglik(eta_new, response);
      if (ll_new >= ll - 1e-12 * std::fabs(ll)) break;
      scale *= 0.5;
    }
    beta = beta_new;
    eta = eta_new;

    for (std::size_t j = 1; j <= p; ++j) {
      if (std::fabs(beta[j]) > kSeparationThreshold) {
        throw SeparationError("fit_logistic: quasi-complete separation on column " +
                              std::to_string(j - 1));
      }
    }

    const double rel = std::fabs(ll_new - ll) / (std::fabs(ll_new) + 1e-300);
    ll = ll_new;
    if (rel < tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw ConvergenceError("fit_logistic: IRLS did not converge");
  }

  // Wald covariance at the optimum, then undo the standardization.
  for (std::size_t i = 0; i < n; ++i) {
    mu[i] = 1.0 / (1.0 + std::exp(-eta[i]));
    w[i] = mu[i] * (1.0 - mu[i]);
  }
  Matrix info(p + 1, p + 1);
  for (std::size_t j = 0; j <= p; ++j) {
    for (std::size_t k = 0; k <= j; ++k) {
      info(j, k) = info(k, j) = kernels::wdot(w.data(), x.col(j), x.col(k), n);
    }
  }
  Matrix chol = info;
  if (!cholesky_lower(chol)) {
    throw SingularityError("fit_logistic: observed information is singular at the optimum");
  }
  const Matrix cov = cholesky_invert(chol);

  FitSummary fit;
  fit.coef.resize(p + 1);
  fit.se.resize(p + 1);
  fit.p_value.resize(p + 1);
  fit.converged = true;
  fit.n_used = n;

  // beta0_orig = beta0 - sum_j beta_j * mean_j / sd_j; beta_j_orig = beta_j / sd_j
  std::vector<double> shift(p + 1, 0.0);
  shift[0] = 1.0;
  fit.coef[0] = beta[0];
  for (std::size_t j = 1; j <= p; ++j) {
    fit.coef[j] = beta[j] / sd[j - 1];
    fit.coef[0] -= beta[j] * mean[j - 1] / sd[j - 1];
    shift[j] = -mean[j - 1] / sd[j - 1];
  }
  double var0 = 0.0;
  for (std::size_t a = 0; a <= p; ++a) {
    for (std::size_t b = 0; b <= p; ++b) var0 += shift[a] * shift[b] * cov(a, b);
  }
  fit.se[0] = std::sqrt(var0);
  for (std::size_t j = 1; j <= p; ++j) fit.se[j] = std::sqrt(cov(j, j)) / sd[j - 1];
  for (std::size_t j = 0; j <= p; ++j) {
    fit.p_value[j] = two_sided_normal_p(fit.coef[j] / fit.se[j]);
  }
  return fit;
}

}  // namespace survsim
