#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "survsim/linalg.hpp"

namespace survsim {

// Unpenalized-fit output. For regressions with an intercept (OLS, logistic)
// coef[0] is the intercept; Cox fits have no intercept and fill coef with the
// p covariate coefficients only.
struct FitSummary {
  std::vector<double> coef;
  std::vector<double> se;
  std::vector<double> p_value;
  bool converged = true;
  std::size_t n_used = 0;
};

// Ordinary least squares with intercept. Standard errors use the unbiased
// residual variance; p-values come from the t distribution on n - p - 1
// degrees of freedom.
FitSummary fit_ols(const Matrix& design, const std::vector<double>& response);

// Logistic maximum likelihood via iteratively reweighted least squares with
// step-halving. Wald standard errors from the inverse observed information;
// p-values from the standard normal.
FitSummary fit_logistic(const Matrix& design, const std::vector<std::uint8_t>& response,
                        std::size_t max_iter = 100, double tol = 1e-9);

}  // namespace survsim
