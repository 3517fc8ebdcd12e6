#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "survsim/glm.hpp"
#include "survsim/linalg.hpp"

namespace survsim {

struct SurvResponse {
  std::vector<double> time;
  std::vector<std::uint8_t> status;  // 1 = event

  std::size_t n() const { return time.size(); }
  std::size_t n_events() const;
  void validate() const;  // throws unless there is at least one event
};

// Subjects sorted by descending time with tied-time blocks marked, so every
// partial-likelihood sweep is a single cumulative pass. Shared by the
// Newton-Raphson fitter and the penalized solver.
struct CoxOrdering {
  std::vector<std::size_t> order;   // descending observation time
  std::vector<std::size_t> blocks;  // index ranges [blocks[b], blocks[b+1]) of tied times
  std::size_t n_events = 0;

  static CoxOrdering make(const SurvResponse& resp);
};

// Breslow log partial likelihood at the given coefficients. One descending
// sweep; the risk-set accumulator is kept relative to the running maximum
// linear predictor so exp() never overflows.
double cox_partial_loglik(const std::vector<double>& beta, const Matrix& design,
                          const SurvResponse& resp);

// Same sweep given a precomputed ordering and linear predictor.
double cox_partial_loglik(const CoxOrdering& ord, const SurvResponse& resp,
                          const std::vector<double>& eta);

// Log partial likelihood plus its gradient and diagonal Hessian with respect
// to the per-subject linear predictor. grad and hess_diag must have length n.
double cox_loglik_eta_derivs(const CoxOrdering& ord, const SurvResponse& resp,
                             const std::vector<double>& eta, double* grad, double* hess_diag);

// Log partial likelihood plus score vector and observed information (full
// p x p) with respect to the coefficients of the given design. Drives both
// the Newton-Raphson fitter and the penalized solver's quadratic
// subproblems.
double cox_loglik_score_info(const CoxOrdering& ord, const SurvResponse& resp, const Matrix& x,
                             const std::vector<double>& eta, std::vector<double>& score,
                             Matrix& info);

// Newton-Raphson maximizer of the Breslow partial likelihood with analytic
// gradient/Hessian and step-halving. Wald standard errors from the inverse
// observed information, p-values from the standard normal. No intercept:
// coef/se/p_value have exactly p entries.
FitSummary fit_cox_nr(const Matrix& design, const SurvResponse& resp, double tol = 1e-9,
                      std::size_t max_iter = 100);

}  // namespace survsim
