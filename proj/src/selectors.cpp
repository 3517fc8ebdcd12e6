#include "survsim/selectors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "survsim/cox.hpp"
#include "survsim/elnet.hpp"
#include "survsim/errors.hpp"
#include "survsim/glm.hpp"

namespace survsim {

namespace {

constexpr double kSelectP = 0.05;
// Sentinel score for a feature whose fit failed: worse than any p-value and
// distinct scores still compare equal across two failed features.
constexpr double kFailedScore = 2.0;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Fixed fork tag so the Cox-elnet CV sees the same stream whether it is run
// standalone, through run_all_selectors, or inside a pipeline.
constexpr std::uint64_t kCoxCvTag = 0x636f7863;

SelectionResult blank(MethodId id) {
  SelectionResult r;
  r.method = id;
  r.scores.fill(kNaN);
  return r;
}

SelectionResult failed_result(MethodId id) {
  SelectionResult r = blank(id);
  r.fit_failed = true;
  return r;
}

SurvResponse response_of(const SimDataset& ds) { return {ds.time_obs, ds.status}; }

std::vector<double> log_times(const SimDataset& ds) {
  std::vector<double> y(ds.n());
  for (std::size_t i = 0; i < ds.n(); ++i) y[i] = std::log(ds.time_obs[i]);
  return y;
}

std::vector<double> status_column(const SimDataset& ds) {
  std::vector<double> s(ds.n());
  for (std::size_t i = 0; i < ds.n(); ++i) s[i] = ds.status[i] ? 1.0 : 0.0;
  return s;
}

// Ascending p-value ranking over all observed features, failed fits last.
void rank_by_pvalue(SelectionResult& r) {
  r.ranking.resize(kObservedDim);
  std::iota(r.ranking.begin(), r.ranking.end(), std::size_t{0});
  std::stable_sort(r.ranking.begin(), r.ranking.end(), [&](std::size_t a, std::size_t b) {
    return r.scores[a] < r.scores[b];
  });
}

void select_by_pvalue(SelectionResult& r) {
  for (std::size_t j = 0; j < kObservedDim; ++j) {
    if (r.scores[j] < kSelectP) r.selected.push_back(j);
  }
}

// Descending |coefficient| ranking of the given features; zeros trail in
// index order (the comparator's tie break).
std::vector<std::size_t> rank_by_magnitude(const std::vector<std::size_t>& features,
                                           const std::array<double, kObservedDim>& scores) {
  std::vector<std::size_t> ranking = features;
  std::stable_sort(ranking.begin(), ranking.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  return ranking;
}

struct CoxElnetShared {
  bool failed = false;
  CoxCvFit fit;
};

CoxElnetShared cox_elnet_shared(const SimDataset& ds, const SolverSettings& settings,
                                const RandomStream& base) {
  CoxElnetShared shared;
  const std::size_t n = ds.n();
  const bool with_status = settings.include_event_indicator_in_cox;
  Matrix design(n, kObservedDim + (with_status ? 1 : 0));
  for (std::size_t j = 0; j < kObservedDim; ++j) {
    std::copy(ds.x_obs.col(j), ds.x_obs.col(j) + n, design.col(j));
  }
  if (with_status) {
    const std::vector<double> s = status_column(ds);
    std::copy(s.begin(), s.end(), design.col(kObservedDim));
  }
  try {
    shared.fit = cox_elnet_cv_fit(design, response_of(ds), settings.mix, settings.cv_folds,
                                  base.fork(kCoxCvTag), settings.n_lambda, settings.eps_ratio,
                                  settings.cd_tol);
  } catch (const Error&) {
    shared.failed = true;
  }
  return shared;
}

SelectionResult cox_elnet_result(const CoxElnetShared& shared, LambdaChoice which) {
  const MethodId id =
      which == LambdaChoice::lambda_1se ? MethodId::cox_enet_1se : MethodId::cox_enet_min;
  if (shared.failed) return failed_result(id);
  SelectionResult r = blank(id);
  const std::size_t li =
      which == LambdaChoice::lambda_1se ? shared.fit.cv.index_1se : shared.fit.cv.index_min;
  const double* coef = shared.fit.path_coefs.col(li);
  for (std::size_t j = 0; j < kObservedDim; ++j) {
    r.scores[j] = std::fabs(coef[j]);
    if (coef[j] != 0.0) r.selected.push_back(j);
  }
  r.ranking = rank_by_magnitude(r.selected, r.scores);
  return r;
}

SelectionResult compose_pipeline_independent(const SelectionResult& gaussian_enet,
                                             const SelectionResult& cox_1se) {
  if (gaussian_enet.fit_failed || cox_1se.fit_failed) {
    return failed_result(MethodId::pipeline_independent);
  }
  SelectionResult r = blank(MethodId::pipeline_independent);
  r.scores = gaussian_enet.scores;  // ranking source: Gaussian-elnet magnitudes
  r.selected = cox_1se.selected;    // selection source: lambda_1se Cox support
  r.ranking = rank_by_magnitude(r.selected, r.scores);
  r.fit_warnings = gaussian_enet.fit_warnings + cox_1se.fit_warnings;
  return r;
}

SelectionResult compose_pipeline_correlated(const SelectionResult& cox_1se,
                                            const SelectionResult& screen) {
  if (cox_1se.fit_failed || screen.fit_failed) {
    return failed_result(MethodId::pipeline_correlated);
  }
  SelectionResult r = blank(MethodId::pipeline_correlated);
  r.scores = cox_1se.scores;  // ranking source: lambda_1se Cox magnitudes
  r.selected = screen.selected;
  r.ranking = rank_by_magnitude(r.selected, r.scores);
  r.fit_warnings = cox_1se.fit_warnings + screen.fit_warnings;
  return r;
}

}  // namespace

const char* method_name(MethodId id) {
  switch (id) {
    case MethodId::cox_univariate: return "cox_univariate";
    case MethodId::cox_oracle_multi: return "cox_oracle_multi";
    case MethodId::cox_enet_1se: return "cox_enet_1se";
    case MethodId::cox_enet_min: return "cox_enet_min";
    case MethodId::logistic_univariate: return "logistic_univariate";
    case MethodId::gaussian_two_cov: return "gaussian_two_cov";
    case MethodId::gaussian_multi: return "gaussian_multi";
    case MethodId::gaussian_enet: return "gaussian_enet";
    case MethodId::pipeline_independent: return "pipeline_independent";
    case MethodId::pipeline_correlated: return "pipeline_correlated";
  }
  return "unknown";
}

SelectionResult select_univariate_cox(const SimDataset& ds) {
  SelectionResult r = blank(MethodId::cox_univariate);
  const SurvResponse resp = response_of(ds);
  const std::size_t n = ds.n();
  Matrix one(n, 1);
  for (std::size_t j = 0; j < kObservedDim; ++j) {
    std::copy(ds.x_obs.col(j), ds.x_obs.col(j) + n, one.col(0));
    try {
      const FitSummary fit = fit_cox_nr(one, resp);
      if (!fit.converged) throw ConvergenceError("univariate cox did not converge");
      r.scores[j] = fit.p_value[0];
    } catch (const Error&) {
      r.scores[j] = kFailedScore;  // unselected, ranked last
      ++r.fit_warnings;
    }
  }
  if (r.fit_warnings == static_cast<int>(kObservedDim)) {
    return failed_result(MethodId::cox_univariate);
  }
  select_by_pvalue(r);
  rank_by_pvalue(r);
  return r;
}

SelectionResult rank_oracle_multivariate_cox(const SimDataset& ds) {
  SelectionResult r = blank(MethodId::cox_oracle_multi);
  const std::size_t n = ds.n();
  Matrix design(n, kObservedTrue);
  for (std::size_t j = 0; j < kObservedTrue; ++j) {
    std::copy(ds.x_obs.col(j), ds.x_obs.col(j) + n, design.col(j));
  }
  try {
    const FitSummary fit = fit_cox_nr(design, response_of(ds));
    if (!fit.converged) throw ConvergenceError("oracle cox did not converge");
    for (std::size_t j = 0; j < kObservedTrue; ++j) r.scores[j] = fit.p_value[j];
  } catch (const Error&) {
    return failed_result(MethodId::cox_oracle_multi);
  }
  r.selected = {0, 1, 2, 3, 4};  // oracle access; excluded from selection metrics
  r.ranking = r.selected;
  std::stable_sort(r.ranking.begin(), r.ranking.end(), [&](std::size_t a, std::size_t b) {
    return r.scores[a] < r.scores[b];
  });
  return r;
}

SelectionResult select_cox_elnet(const SimDataset& ds, LambdaChoice which,
                                 const SolverSettings& settings, const RandomStream& base) {
  return cox_elnet_result(cox_elnet_shared(ds, settings, base), which);
}

SelectionResult select_univariate_logistic(const SimDataset& ds) {
  SelectionResult r = blank(MethodId::logistic_univariate);
  const std::size_t n = ds.n();
  const std::size_t n_events = ds.n_events();
  if (n_events == 0 || n_events == n) {
    return failed_result(MethodId::logistic_univariate);
  }
  Matrix design(n, 2);
  std::copy(ds.time_obs.begin(), ds.time_obs.end(), design.col(1));
  for (std::size_t j = 0; j < kObservedDim; ++j) {
    std::copy(ds.x_obs.col(j), ds.x_obs.col(j) + n, design.col(0));
    try {
      const FitSummary fit = fit_logistic(design, ds.status);
      r.scores[j] = fit.p_value[1];  // the feature's p-value, not the time's
    } catch (const Error&) {
      return failed_result(MethodId::logistic_univariate);
    }
  }
  select_by_pvalue(r);
  rank_by_pvalue(r);
  return r;
}

SelectionResult select_gaussian_two_cov(const SimDataset& ds) {
  SelectionResult r = blank(MethodId::gaussian_two_cov);
  const std::size_t n = ds.n();
  const std::vector<double> y = log_times(ds);
  const std::vector<double> s = status_column(ds);
  Matrix design(n, 2);
  std::copy(s.begin(), s.end(), design.col(1));
  for (std::size_t j = 0; j < kObservedDim; ++j) {
    std::copy(ds.x_obs.col(j), ds.x_obs.col(j) + n, design.col(0));
    try {
      const FitSummary fit = fit_ols(design, y);
      r.scores[j] = fit.p_value[1];
    } catch (const Error&) {
      return failed_result(MethodId::gaussian_two_cov);
    }
  }
  select_by_pvalue(r);
  rank_by_pvalue(r);
  return r;
}

SelectionResult rank_multivariate_gaussian(const SimDataset& ds, const SelectionResult& prior) {
  if (prior.fit_failed) return failed_result(MethodId::gaussian_multi);
  SelectionResult r = blank(MethodId::gaussian_multi);
  r.selected = prior.selected;  // pass-through; ranking is this method's output
  if (prior.selected.empty()) return r;

  const std::size_t n = ds.n();
  const std::vector<double> y = log_times(ds);
  const std::vector<double> s = status_column(ds);
  Matrix design(n, 1 + prior.selected.size());
  std::copy(s.begin(), s.end(), design.col(0));
  for (std::size_t c = 0; c < prior.selected.size(); ++c) {
    const double* src = ds.x_obs.col(prior.selected[c]);
    std::copy(src, src + n, design.col(1 + c));
  }
  try {
    const FitSummary fit = fit_ols(design, y);
    for (std::size_t c = 0; c < prior.selected.size(); ++c) {
      r.scores[prior.selected[c]] = fit.p_value[2 + c];  // after intercept and status
    }
  } catch (const Error&) {
    return failed_result(MethodId::gaussian_multi);
  }
  r.ranking = prior.selected;
  std::stable_sort(r.ranking.begin(), r.ranking.end(), [&](std::size_t a, std::size_t b) {
    return r.scores[a] < r.scores[b];
  });
  return r;
}

SelectionResult select_gaussian_elnet(const SimDataset& ds, const SolverSettings& settings) {
  SelectionResult r = blank(MethodId::gaussian_enet);
  const std::size_t n = ds.n();
  Matrix design(n, kObservedDim + 1);
  for (std::size_t j = 0; j < kObservedDim; ++j) {
    std::copy(ds.x_obs.col(j), ds.x_obs.col(j) + n, design.col(j));
  }
  const std::vector<double> s = status_column(ds);
  std::copy(s.begin(), s.end(), design.col(kObservedDim));

  PenaltySpec spec;
  spec.mix = settings.mix;
  spec.lambda = settings.gaussian_elnet_lambda;
  std::vector<double> coef;
  try {
    coef = fit_gaussian_elnet(design, log_times(ds), spec, settings.cd_tol);
  } catch (const Error&) {
    return failed_result(MethodId::gaussian_enet);
  }
  for (std::size_t j = 0; j < kObservedDim; ++j) {
    r.scores[j] = std::fabs(coef[j + 1]);  // status coefficient ignored for selection
    if (coef[j + 1] != 0.0) r.selected.push_back(j);
  }
  std::vector<std::size_t> all(kObservedDim);
  std::iota(all.begin(), all.end(), std::size_t{0});
  r.ranking = rank_by_magnitude(all, r.scores);
  return r;
}

SelectionResult pipeline_independent(const SimDataset& ds, const SolverSettings& settings,
                                     const RandomStream& base) {
  const SelectionResult step1 = select_gaussian_elnet(ds, settings);
  const SelectionResult step2 =
      cox_elnet_result(cox_elnet_shared(ds, settings, base), LambdaChoice::lambda_1se);
  return compose_pipeline_independent(step1, step2);
}

SelectionResult pipeline_correlated(const SimDataset& ds, const SolverSettings& settings,
                                    const RandomStream& base) {
  const SelectionResult step1 =
      cox_elnet_result(cox_elnet_shared(ds, settings, base), LambdaChoice::lambda_1se);
  const SelectionResult step2 = ds.n_events() < settings.event_threshold
                                    ? select_gaussian_two_cov(ds)
                                    : select_gaussian_elnet(ds, settings);
  return compose_pipeline_correlated(step1, step2);
}

std::array<SelectionResult, kNumMethods> run_all_selectors(const SimDataset& ds,
                                                           const SolverSettings& settings,
                                                           const RandomStream& base) {
  std::array<SelectionResult, kNumMethods> out;
  const CoxElnetShared shared = cox_elnet_shared(ds, settings, base);

  out[0] = select_univariate_cox(ds);
  out[1] = rank_oracle_multivariate_cox(ds);
  out[2] = cox_elnet_result(shared, LambdaChoice::lambda_1se);
  out[3] = cox_elnet_result(shared, LambdaChoice::lambda_min);
  out[4] = select_univariate_logistic(ds);
  out[5] = select_gaussian_two_cov(ds);
  out[6] = rank_multivariate_gaussian(ds, out[5]);
  out[7] = select_gaussian_elnet(ds, settings);
  out[8] = compose_pipeline_independent(out[7], out[2]);
  out[9] = compose_pipeline_correlated(
      out[2], ds.n_events() < settings.event_threshold ? out[5] : out[7]);
  return out;
}

}  // namespace survsim
