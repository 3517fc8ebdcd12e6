#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "survsim/elnet.hpp"
#include "survsim/glm.hpp"
#include "survsim/selectors.hpp"
#include "survsim/sim.hpp"
#include "test_util.hpp"

using namespace survsim;

namespace {

SimDataset standard_dataset(std::size_t n, double censor, double rho, std::uint64_t rep) {
  ScenarioConfig cfg;
  cfg.n = n;
  cfg.censor_rate = censor;
  cfg.rho = rho;
  RandomStream s = derive_stream(2024, 0, rep);
  return assemble_dataset(cfg, TrueModel::standard(rho), s);
}

// Hand-built dataset: iid features, hazard driven by chosen columns only.
SimDataset planted_dataset(std::size_t n, const std::array<double, kObservedDim>& effect,
                           double censor, std::uint64_t seed) {
  RandomStream s(seed);
  SimDataset ds;
  ds.x_obs = sample_mvn(n, kObservedDim, 0.0, s);
  const std::vector<double> beta(effect.begin(), effect.end());
  const auto t = gen_survival_times(ds.x_obs, beta, {2.0, 4.0}, s);
  auto [obs, st] = apply_censoring(t, censor, s);
  ds.time_obs = std::move(obs);
  ds.status = std::move(st);
  ds.true_ids = {0, 1, 2, 3, 4};
  for (std::size_t k = 0; k < kObservedTrue; ++k) ds.true_beta_obs[k] = effect[k];
  ds.baseline = {2.0, 4.0};
  return ds;
}

bool is_selected(const SelectionResult& r, std::size_t j) {
  return std::find(r.selected.begin(), r.selected.end(), j) != r.selected.end();
}

}  // namespace

TEST_CASE("univariate cox: a dominant feature is ranked first") {
  const SimDataset ds = planted_dataset(400, {3.0, 0, 0, 0, 0, 0, 0, 0, 0, 0}, 0.1, 61);
  const SelectionResult r = select_univariate_cox(ds);
  REQUIRE_FALSE(r.fit_failed);
  CHECK(r.ranking.front() == 0);
  CHECK(is_selected(r, 0));
  CHECK(r.scores[0] < 1e-8);
}

TEST_CASE("univariate cox: type-I calibration on all-noise data") {
  std::size_t total_selected = 0;
  const int reps = 400;
  for (int rep = 0; rep < reps; ++rep) {
    const SimDataset ds =
        planted_dataset(1000, {0, 0, 0, 0, 0, 0, 0, 0, 0, 0}, 0.1, 1000 + rep);
    total_selected += select_univariate_cox(ds).selected.size();
  }
  // expectation 10 * 0.05 = 0.5 selections per replicate
  const double mean_selected = static_cast<double>(total_selected) / reps;
  CHECK(mean_selected >= 0.3);
  CHECK(mean_selected <= 0.7);
}

TEST_CASE("univariate cox: n = 3 with one event fails as a unit") {
  SimDataset ds = planted_dataset(3, {1, 2, 3, 4, 5, 0, 0, 0, 0, 0}, 0.0, 62);
  ds.status = {0, 1, 0};
  const SelectionResult r = select_univariate_cox(ds);
  CHECK(r.fit_failed);
  CHECK(r.selected.empty());
  CHECK(r.ranking.empty());
}

TEST_CASE("oracle cox: ranking matches descending true coefficients at scale") {
  int correct = 0;
  const int reps = 100;
  for (int rep = 0; rep < reps; ++rep) {
    const SimDataset ds = standard_dataset(5000, 0.0, 0.0, 4000 + rep);
    const SelectionResult r = rank_oracle_multivariate_cox(ds);
    REQUIRE_FALSE(r.fit_failed);
    std::array<std::size_t, 5> expected{0, 1, 2, 3, 4};
    std::sort(expected.begin(), expected.end(),
              [&](std::size_t a, std::size_t b) { return ds.true_beta_obs[a] > ds.true_beta_obs[b]; });
    if (std::equal(expected.begin(), expected.end(), r.ranking.begin())) ++correct;
  }
  CHECK(correct >= 99);
}

TEST_CASE("oracle cox: zero events propagates to fit_failed") {
  SimDataset ds = planted_dataset(20, {1, 2, 3, 4, 5, 0, 0, 0, 0, 0}, 0.0, 63);
  std::fill(ds.status.begin(), ds.status.end(), std::uint8_t{0});
  const SelectionResult r = rank_oracle_multivariate_cox(ds);
  CHECK(r.fit_failed);
}

TEST_CASE("cox elnet selectors: ranking is by absolute coefficient, zeros excluded") {
  const SimDataset ds = standard_dataset(300, 0.1, 0.0, 70);
  const SolverSettings settings;
  const RandomStream base = derive_stream(2024, 0, 70);
  const SelectionResult r = select_cox_elnet(ds, LambdaChoice::lambda_1se, settings, base);
  REQUIRE_FALSE(r.fit_failed);
  CHECK(r.ranking.size() == r.selected.size());
  for (std::size_t k = 1; k < r.ranking.size(); ++k) {
    CHECK(r.scores[r.ranking[k - 1]] >= r.scores[r.ranking[k]]);
  }
  for (std::size_t j : r.selected) CHECK(r.scores[j] > 0.0);
}

TEST_CASE("cox elnet: lambda_1se selects no more than lambda_min almost always") {
  const SolverSettings settings;
  int ok = 0;
  const int reps = 60;
  for (int rep = 0; rep < reps; ++rep) {
    const SimDataset ds = standard_dataset(500, 0.5, 0.0, 5000 + rep);
    const RandomStream base = derive_stream(2024, 0, 5000 + rep);
    const SelectionResult r1 = select_cox_elnet(ds, LambdaChoice::lambda_1se, settings, base);
    const SelectionResult r2 = select_cox_elnet(ds, LambdaChoice::lambda_min, settings, base);
    if (r1.fit_failed || r2.fit_failed) continue;
    if (r1.selected.size() <= r2.selected.size()) ++ok;
  }
  CHECK(ok >= reps * 95 / 100);
}

TEST_CASE("univariate logistic: all-event status fails as a unit") {
  const SimDataset ds = planted_dataset(100, {1, 2, 3, 4, 5, 0, 0, 0, 0, 0}, 0.0, 71);
  const SelectionResult r = select_univariate_logistic(ds);
  CHECK(r.fit_failed);  // single-class response
}

TEST_CASE("univariate logistic: scores are the feature p-values") {
  const SimDataset ds = standard_dataset(400, 0.3, 0.0, 72);
  const SelectionResult r = select_univariate_logistic(ds);
  REQUIRE_FALSE(r.fit_failed);
  Matrix design(ds.n(), 2);
  std::copy(ds.time_obs.begin(), ds.time_obs.end(), design.col(1));
  for (std::size_t j = 0; j < kObservedDim; ++j) {
    std::copy(ds.x_obs.col(j), ds.x_obs.col(j) + ds.n(), design.col(0));
    const FitSummary fit = fit_logistic(design, ds.status);
    CHECK(r.scores[j] == fit.p_value[1]);
  }
}

TEST_CASE("gaussian two-cov: planted signal is detected") {
  // log T = -x_0 + noise via beta = (alpha * 1, 0, ...) and shape alpha
  const SimDataset ds = planted_dataset(800, {2.0, 0, 0, 0, 0, 0, 0, 0, 0, 0}, 0.2, 73);
  const SelectionResult r = select_gaussian_two_cov(ds);
  REQUIRE_FALSE(r.fit_failed);
  CHECK(is_selected(r, 0));
  CHECK(r.scores[0] < 1e-10);
  CHECK(r.ranking.front() == 0);
}

TEST_CASE("gaussian multi: refit over the screen's picks, empty prior is vacuous") {
  const SimDataset ds = standard_dataset(300, 0.2, 0.0, 74);
  const SelectionResult prior = select_gaussian_two_cov(ds);
  const SelectionResult r = rank_multivariate_gaussian(ds, prior);
  REQUIRE_FALSE(r.fit_failed);
  CHECK(r.selected == prior.selected);
  CHECK(r.ranking.size() == prior.selected.size());

  SelectionResult empty_prior = prior;
  empty_prior.selected.clear();
  const SelectionResult r2 = rank_multivariate_gaussian(ds, empty_prior);
  CHECK_FALSE(r2.fit_failed);
  CHECK(r2.ranking.empty());
  CHECK(r2.selected.empty());
}

TEST_CASE("gaussian multi: multivariate refit can reorder correlated features") {
  int reordered = 0;
  const int reps = 50;
  for (int rep = 0; rep < reps; ++rep) {
    const SimDataset ds = standard_dataset(300, 0.2, 0.8, 6000 + rep);
    const SelectionResult prior = select_gaussian_two_cov(ds);
    if (prior.fit_failed || prior.selected.size() < 2) continue;
    const SelectionResult r = rank_multivariate_gaussian(ds, prior);
    if (r.fit_failed) continue;
    std::vector<std::size_t> prior_order = prior.ranking;
    prior_order.erase(std::remove_if(prior_order.begin(), prior_order.end(),
                                     [&](std::size_t j) { return !is_selected(prior, j); }),
                      prior_order.end());
    if (prior_order != r.ranking) ++reordered;
  }
  CHECK(reordered >= 1);
}

TEST_CASE("gaussian elnet: fixed penalty, planted feature ranked first") {
  SolverSettings settings;
  int first = 0;
  const int reps = 100;
  for (int rep = 0; rep < reps; ++rep) {
    const SimDataset ds =
        planted_dataset(5000, {3.0, 0, 0, 0, 0, 0, 0, 0, 0, 0}, 0.1, 7000 + rep);
    const SelectionResult r = select_gaussian_elnet(ds, settings);
    REQUIRE_FALSE(r.fit_failed);
    if (!r.ranking.empty() && r.ranking.front() == 0) ++first;
  }
  CHECK(first >= 99);
}

TEST_CASE("gaussian elnet: a penalty at lambda_max empties the selection") {
  const SimDataset ds = standard_dataset(200, 0.2, 0.0, 75);
  Matrix design(ds.n(), kObservedDim + 1);
  for (std::size_t j = 0; j < kObservedDim; ++j) {
    std::copy(ds.x_obs.col(j), ds.x_obs.col(j) + ds.n(), design.col(j));
  }
  for (std::size_t i = 0; i < ds.n(); ++i) design(i, kObservedDim) = ds.status[i];
  std::vector<double> y(ds.n());
  for (std::size_t i = 0; i < ds.n(); ++i) y[i] = std::log(ds.time_obs[i]);
  const auto grid = lambda_path(design, y, 1.0, 100, 0.01);

  SolverSettings settings;
  settings.gaussian_elnet_lambda = grid.front() * 1.1;
  const SelectionResult r = select_gaussian_elnet(ds, settings);
  CHECK(r.selected.empty());
  // all-zero scores: full ranking still emitted, stable order
  CHECK(r.ranking.size() == kObservedDim);
}

TEST_CASE("pipelines: composition matches the standalone stages") {
  const SimDataset ds = standard_dataset(300, 0.5, 0.8, 76);
  const SolverSettings settings;
  const RandomStream base = derive_stream(2024, 0, 76);

  const SelectionResult gauss = select_gaussian_elnet(ds, settings);
  const SelectionResult cox1se = select_cox_elnet(ds, LambdaChoice::lambda_1se, settings, base);
  const SelectionResult pi = pipeline_independent(ds, settings, base);
  REQUIRE_FALSE(pi.fit_failed);

  CHECK(pi.selected == cox1se.selected);
  // ranking = step-2 support ordered by step-1 magnitudes, zeros last stable
  std::vector<std::size_t> expected = cox1se.selected;
  std::stable_sort(expected.begin(), expected.end(),
                   [&](std::size_t a, std::size_t b) { return gauss.scores[a] > gauss.scores[b]; });
  CHECK(pi.ranking == expected);

  const SelectionResult pc = pipeline_correlated(ds, settings, base);
  REQUIRE_FALSE(pc.fit_failed);
  // 150 events < 900: step 2 is the two-covariate screen
  const SelectionResult screen = select_gaussian_two_cov(ds);
  CHECK(pc.selected == screen.selected);
  std::vector<std::size_t> expected2 = screen.selected;
  std::stable_sort(expected2.begin(), expected2.end(), [&](std::size_t a, std::size_t b) {
    return cox1se.scores[a] > cox1se.scores[b];
  });
  CHECK(pc.ranking == expected2);
}

TEST_CASE("pipelines: the two elastic-net rankings genuinely differ sometimes") {
  const SolverSettings settings;
  int differ = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const SimDataset ds = standard_dataset(300, 0.5, 0.8, 8000 + rep);
    const RandomStream base = derive_stream(2024, 0, 8000 + rep);
    const SelectionResult gauss = select_gaussian_elnet(ds, settings);
    const SelectionResult cox1se =
        select_cox_elnet(ds, LambdaChoice::lambda_1se, settings, base);
    if (gauss.fit_failed || cox1se.fit_failed) continue;
    auto order = [](const SelectionResult& r) {
      std::vector<std::size_t> all(kObservedDim);
      std::iota(all.begin(), all.end(), std::size_t{0});
      std::stable_sort(all.begin(), all.end(),
                       [&](std::size_t a, std::size_t b) { return r.scores[a] > r.scores[b]; });
      return all;
    };
    if (order(gauss) != order(cox1se)) ++differ;
  }
  CHECK(differ >= 1);
}

TEST_CASE("pipeline correlated: the 900-event boundary uses the large branch") {
  const SolverSettings settings;

  // 1798 * 0.5 -> 899 events: small branch (two-covariate screen)
  const SimDataset small = standard_dataset(1798, 0.5, 0.0, 77);
  CHECK(small.n_events() == 899);
  const RandomStream base_small = derive_stream(2024, 0, 77);
  const SelectionResult pc_small = pipeline_correlated(small, settings, base_small);
  const SelectionResult screen_small = select_gaussian_two_cov(small);
  CHECK(pc_small.selected == screen_small.selected);

  // 1000 * 0.1 -> 900 events exactly: large branch (gaussian elastic net)
  const SimDataset big = standard_dataset(1000, 0.1, 0.0, 78);
  CHECK(big.n_events() == 900);
  const RandomStream base_big = derive_stream(2024, 0, 78);
  const SelectionResult pc_big = pipeline_correlated(big, settings, base_big);
  const SelectionResult enet_big = select_gaussian_elnet(big, settings);
  CHECK(pc_big.selected == enet_big.selected);
}

TEST_CASE("run_all_selectors agrees with standalone calls") {
  const SimDataset ds = standard_dataset(200, 0.5, 0.0, 79);
  const SolverSettings settings;
  const RandomStream base = derive_stream(2024, 0, 79);
  const auto all = run_all_selectors(ds, settings, base);

  const SelectionResult uni = select_univariate_cox(ds);
  CHECK(all[0].selected == uni.selected);
  CHECK(all[0].ranking == uni.ranking);

  const SelectionResult cox1se = select_cox_elnet(ds, LambdaChoice::lambda_1se, settings, base);
  CHECK(all[2].selected == cox1se.selected);
  CHECK(all[2].ranking == cox1se.ranking);

  const SelectionResult coxmin = select_cox_elnet(ds, LambdaChoice::lambda_min, settings, base);
  CHECK(all[3].selected == coxmin.selected);

  const SelectionResult pi = pipeline_independent(ds, settings, base);
  CHECK(all[8].selected == pi.selected);
  CHECK(all[8].ranking == pi.ranking);

  const SelectionResult pc = pipeline_correlated(ds, settings, base);
  CHECK(all[9].selected == pc.selected);
  CHECK(all[9].ranking == pc.ranking);

  for (std::size_t m = 0; m < kNumMethods; ++m) {
    CHECK(all[m].method == static_cast<MethodId>(m));
  }
}

TEST_CASE("p-value selectors: common rescaling leaves sets and orderings unchanged") {
  SimDataset ds = standard_dataset(250, 0.3, 0.0, 80);
  const SelectionResult cox_a = select_univariate_cox(ds);
  const SelectionResult logi_a = select_univariate_logistic(ds);
  const SelectionResult two_a = select_gaussian_two_cov(ds);

  for (std::size_t j = 0; j < kObservedDim; ++j) {
    for (std::size_t i = 0; i < ds.n(); ++i) ds.x_obs(i, j) *= 7.5;
  }
  const SelectionResult cox_b = select_univariate_cox(ds);
  const SelectionResult logi_b = select_univariate_logistic(ds);
  const SelectionResult two_b = select_gaussian_two_cov(ds);

  CHECK(cox_a.selected == cox_b.selected);
  CHECK(cox_a.ranking == cox_b.ranking);
  CHECK(logi_a.selected == logi_b.selected);
  CHECK(logi_a.ranking == logi_b.ranking);
  CHECK(two_a.selected == two_b.selected);
  CHECK(two_a.ranking == two_b.ranking);
}

TEST_CASE("include_event_indicator_in_cox widens the cox design without breaking") {
  const SimDataset ds = standard_dataset(200, 0.5, 0.0, 81);
  SolverSettings settings;
  settings.include_event_indicator_in_cox = true;
  const RandomStream base = derive_stream(2024, 0, 81);
  const SelectionResult r = select_cox_elnet(ds, LambdaChoice::lambda_min, settings, base);
  REQUIRE_FALSE(r.fit_failed);
  for (std::size_t j : r.selected) CHECK(j < kObservedDim);  // indicator never "selected"
}
