#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "survsim/rng.hpp"
#include "survsim/sim.hpp"

namespace survsim {

enum class MethodId : int {
  cox_univariate = 0,     // one Cox fit per feature, select p < 0.05
  cox_oracle_multi,       // the 5 observed true features only (ranking benchmark)
  cox_enet_1se,           // penalized Cox at the cross-validated lambda_1se
  cox_enet_min,           // penalized Cox at the cross-validated lambda_min
  logistic_univariate,    // status on (feature, time), select p < 0.05
  gaussian_two_cov,       // log(time) on (feature, status), select p < 0.05
  gaussian_multi,         // log(time) on status + the two-cov screen's picks
  gaussian_enet,          // penalized Gaussian at fixed lambda
  pipeline_independent,   // recommended composite for independent features
  pipeline_correlated,    // recommended composite for correlated features
};

inline constexpr std::size_t kNumMethods = 10;

const char* method_name(MethodId id);

// The oracle knows the true features; it is never scored on selection.
inline bool method_selection_scored(MethodId id) { return id != MethodId::cox_oracle_multi; }

struct SelectionResult {
  MethodId method = MethodId::cox_univariate;
  std::vector<std::size_t> selected;  // observed-feature column indices, 0..9
  std::vector<std::size_t> ranking;   // strongest effect first
  std::array<double, kObservedDim> scores{};  // p-value or |coefficient| per feature
  bool fit_failed = false;
  int fit_warnings = 0;  // absorbed per-feature fit failures
};

SelectionResult select_univariate_cox(const SimDataset& ds);
SelectionResult rank_oracle_multivariate_cox(const SimDataset& ds);

enum class LambdaChoice { lambda_min, lambda_1se };
SelectionResult select_cox_elnet(const SimDataset& ds, LambdaChoice which,
                                 const SolverSettings& settings, const RandomStream& base);

SelectionResult select_univariate_logistic(const SimDataset& ds);
SelectionResult select_gaussian_two_cov(const SimDataset& ds);
SelectionResult rank_multivariate_gaussian(const SimDataset& ds, const SelectionResult& prior);
SelectionResult select_gaussian_elnet(const SimDataset& ds, const SolverSettings& settings);

SelectionResult pipeline_independent(const SimDataset& ds, const SolverSettings& settings,
                                     const RandomStream& base);
SelectionResult pipeline_correlated(const SimDataset& ds, const SolverSettings& settings,
                                    const RandomStream& base);

// All ten selectors on one dataset. Shared stages (the Cox-elnet CV feeding
// both lambda choices and the pipelines, the two-covariate screen feeding the
// multivariate refit) are computed once; results are identical to the
// standalone calls because every stage forks the base stream by a fixed tag.
std::array<SelectionResult, kNumMethods> run_all_selectors(const SimDataset& ds,
                                                           const SolverSettings& settings,
                                                           const RandomStream& base);

}  // namespace survsim
