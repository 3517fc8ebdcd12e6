#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "survsim/cox.hpp"
#include "survsim/linalg.hpp"
#include "survsim/rng.hpp"

namespace survsim {

struct PenaltySpec {
  double mix = 1.0;     // weight on the L1 term, in (0, 1]
  double lambda = 0.0;  // penalty strength
  std::vector<std::uint8_t> penalize_mask;  // empty = penalize every column

  void validate(std::size_t p) const;
  bool penalized(std::size_t j) const {
    return penalize_mask.empty() || penalize_mask[j] != 0;
  }
};

struct CvResult {
  std::vector<double> lambda_grid;  // descending
  std::vector<double> cv_mean;      // per-lambda mean validation loss
  std::vector<double> cv_se;        // standard error across folds
  double lambda_min = 0.0;
  double lambda_1se = 0.0;
  std::size_t index_min = 0;
  std::size_t index_1se = 0;
  std::vector<std::size_t> fold_assignment;
};

// Descending log-spaced grid from lambda_max (smallest lambda that zeroes
// every penalized coefficient, from the null-model score) down to
// lambda_max * eps_ratio.
std::vector<double> lambda_path(const Matrix& design, const std::vector<double>& response,
                                double mix, std::size_t n_lambda, double eps_ratio,
                                const std::vector<std::uint8_t>& penalize_mask = {});
std::vector<double> lambda_path(const Matrix& design, const SurvResponse& resp, double mix,
                                std::size_t n_lambda, double eps_ratio,
                                const std::vector<std::uint8_t>& penalize_mask = {});

// Gaussian elastic net by cyclic coordinate descent over standardized
// columns. Minimizes
//   (1/2n) sum (y - b0 - x.b)^2 + lambda * sum_j mask_j (mix|b_j| + (1-mix)/2 b_j^2).
// Returns intercept followed by the p coefficients on the original scale.
std::vector<double> fit_gaussian_elnet(const Matrix& design, const std::vector<double>& response,
                                       const PenaltySpec& spec, double tol = 1e-7);

// Cox elastic net: outer quadratic approximation of the Breslow partial
// likelihood (working response + diagonal weights) with weighted coordinate
// descent inside. Returns the p coefficients on the original scale.
std::vector<double> fit_cox_elnet(const Matrix& design, const SurvResponse& resp,
                                  const PenaltySpec& spec, double tol = 1e-7);

// K-fold cross-validation over a shared path with warm starts. Gaussian
// validation loss is held-out MSE; Cox loss is the Verweij-van Houwelingen
// partial-likelihood deviance 2*[l(beta; train) - l(beta; all)], both
// normalized per held-out/total observation.
CvResult cv_select_lambda(const Matrix& design, const std::vector<double>& response, double mix,
                          std::size_t k, RandomStream stream, std::size_t n_lambda = 100,
                          double eps_ratio = 0.01, double tol = 1e-7);
CvResult cv_select_lambda(const Matrix& design, const SurvResponse& resp, double mix,
                          std::size_t k, RandomStream stream, std::size_t n_lambda = 100,
                          double eps_ratio = 0.01, double tol = 1e-7);

// CV plus the full-data coefficient path (original scale, one column per
// lambda), so callers can read off fits at lambda_min / lambda_1se without
// refitting. Used by the selectors.
struct CoxCvFit {
  CvResult cv;
  Matrix path_coefs;  // p x n_lambda
};
CoxCvFit cox_elnet_cv_fit(const Matrix& design, const SurvResponse& resp, double mix,
                          std::size_t k, RandomStream stream, std::size_t n_lambda = 100,
                          double eps_ratio = 0.01, double tol = 1e-7);

}  // namespace survsim
