#include "survsim/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

#include "survsim/cox.hpp"
#include "survsim/errors.hpp"

namespace survsim {

namespace {

// Run body(r) for r in [0, count) on a shared atomic counter. Results must be
// written to per-index slots so the schedule cannot leak into the output.
template <class Fn>
void parallel_for_index(std::size_t count, unsigned threads, Fn&& body) {
  unsigned t = threads == 0 ? std::thread::hardware_concurrency() : threads;
  if (t == 0) t = 1;
  t = static_cast<unsigned>(std::min<std::size_t>(t, count));
  if (t <= 1) {
    for (std::size_t r = 0; r < count; ++r) body(r);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(t);
  for (unsigned w = 0; w < t; ++w) {
    pool.emplace_back([&] {
      for (std::size_t r = next.fetch_add(1); r < count; r = next.fetch_add(1)) body(r);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

UnitScore score_dataset(const SimDataset& ds, const SelectionResult& result) {
  UnitScore s;
  s.method = result.method;
  if (result.fit_failed) {
    // A failed fit selects nothing: not positive-by-test, rejects all noise.
    s.fit_failed = true;
    s.all_noise_rejected = true;
    return s;
  }

  bool all_true = true;
  for (std::size_t j = 0; j < kObservedTrue; ++j) {
    if (std::find(result.selected.begin(), result.selected.end(), j) == result.selected.end()) {
      all_true = false;
      break;
    }
  }
  s.all_true_selected = all_true;

  s.all_noise_rejected = true;
  for (std::size_t j : result.selected) {
    if (j >= kObservedTrue) {
      s.all_noise_rejected = false;
      break;
    }
  }

  // Relative order of the observed true features inside the ranking must
  // match descending true coefficient; noise interleaving is ignored.
  std::array<std::ptrdiff_t, kObservedTrue> pos;
  pos.fill(-1);
  for (std::size_t k = 0; k < result.ranking.size(); ++k) {
    if (result.ranking[k] < kObservedTrue) pos[result.ranking[k]] = static_cast<std::ptrdiff_t>(k);
  }
  std::array<std::size_t, kObservedTrue> expected{0, 1, 2, 3, 4};
  std::sort(expected.begin(), expected.end(), [&](std::size_t a, std::size_t b) {
    return ds.true_beta_obs[a] > ds.true_beta_obs[b];
  });
  bool ranking_ok = true;
  for (std::size_t k = 0; k < kObservedTrue && ranking_ok; ++k) {
    if (pos[expected[k]] < 0) ranking_ok = false;
    if (k > 0 && ranking_ok && pos[expected[k]] <= pos[expected[k - 1]]) ranking_ok = false;
  }
  // Any score tie among the true features means the method failed to tell
  // two distinct effects apart.
  for (std::size_t a = 0; a < kObservedTrue && ranking_ok; ++a) {
    if (std::isnan(result.scores[a])) {
      ranking_ok = false;
      break;
    }
    for (std::size_t b = a + 1; b < kObservedTrue; ++b) {
      if (result.scores[a] == result.scores[b]) {
        ranking_ok = false;
        break;
      }
    }
  }
  s.ranking_correct = ranking_ok;
  return s;
}

MethodMetrics aggregate(const std::vector<UnitScore>& scores) {
  if (scores.empty()) throw InvalidParameterError("aggregate: no scores");
  MethodMetrics m;
  m.method = scores.front().method;
  m.selection_scored = method_selection_scored(m.method);
  std::size_t n_true = 0, n_noise = 0, n_rank = 0, n_fail = 0;
  for (const UnitScore& s : scores) {
    if (s.method != m.method) throw InvalidParameterError("aggregate: mixed methods");
    n_true += s.all_true_selected ? 1 : 0;
    n_noise += s.all_noise_rejected ? 1 : 0;
    n_rank += s.ranking_correct ? 1 : 0;
    n_fail += s.fit_failed ? 1 : 0;
  }
  const std::size_t n = scores.size();
  m.n_replicates = n;
  m.n_fit_failures = n_fail;
  m.ranking_accuracy = static_cast<double>(n_rank) / static_cast<double>(n);
  m.rank_ci = wilson95(n_rank, n);
  if (m.selection_scored) {
    m.sensitivity = static_cast<double>(n_true) / static_cast<double>(n);
    m.specificity = static_cast<double>(n_noise) / static_cast<double>(n);
    m.selection_accuracy = 0.5 * (m.sensitivity + m.specificity);
    m.sens_ci = wilson95(n_true, n);
    m.spec_ci = wilson95(n_noise, n);
  } else {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    m.sensitivity = m.specificity = m.selection_accuracy = nan;
    m.sens_ci = m.spec_ci = {nan, nan};
  }
  return m;
}

ScenarioReport run_scenario(const ScenarioConfig& config, const TrueModel& model,
                            unsigned threads) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<std::array<UnitScore, kNumMethods>> slots(config.replicates);
  parallel_for_index(config.replicates, threads, [&](std::size_t r) {
    RandomStream stream = derive_stream(config.master_seed, config.scenario_id, r);
    const SimDataset ds = assemble_dataset(config, model, stream);
    const auto results = run_all_selectors(ds, config.solver, stream);
    for (std::size_t m = 0; m < kNumMethods; ++m) {
      slots[r][m] = score_dataset(ds, results[m]);
    }
  });

  ScenarioReport report;
  report.config = config;
  report.n_events = config.n_events();
  std::vector<UnitScore> column(config.replicates);
  for (std::size_t m = 0; m < kNumMethods; ++m) {
    for (std::size_t r = 0; r < config.replicates; ++r) column[r] = slots[r][m];
    report.per_method[m] = aggregate(column);
  }
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

RandomStream probe_stream(const ScenarioConfig& config, std::size_t alpha_index,
                          std::size_t replicate) {
  return derive_stream(config.master_seed, config.scenario_id, replicate)
      .fork(0x70726f62u + alpha_index);
}

std::vector<ProbeRow> degenerate_alpha_probe(const std::vector<double>& alpha_values,
                                             const ScenarioConfig& config, unsigned threads) {
  config.validate();
  if (alpha_values.empty()) throw InvalidParameterError("probe: empty alpha list");
  for (double a : alpha_values) {
    if (!(a > 0.0) || a > 4.0)
      throw InvalidParameterError("probe: alpha values must lie in (0, 4]");
  }

  const TrueModel model = TrueModel::standard(config.rho);
  std::vector<ProbeRow> rows;
  rows.reserve(alpha_values.size());

  for (std::size_t ai = 0; ai < alpha_values.size(); ++ai) {
    ProbeRow row;
    row.shape_alpha = alpha_values[ai];
    row.n_replicates = config.replicates;

    enum class Outcome { ok, degenerate, divergence, singular, nonidentifiable, nonconverged };
    std::vector<Outcome> outcomes(config.replicates);
    parallel_for_index(config.replicates, threads, [&](std::size_t r) {
      RandomStream stream = probe_stream(config, ai, r);
      const double shape = alpha_values[ai];
      const double scale =
          config.baseline_grid[stream.uniform_below(config.baseline_grid.size())];
      const Matrix x = sample_mvn(config.n, kTrueDim, model.rho, stream);

      // Raw inverse transform, evaluated in linear floating point like the
      // reference scripts: small shapes drive times into 0 / inf.
      std::vector<double> t(config.n);
      bool degenerate = false;
      for (std::size_t i = 0; i < config.n; ++i) {
        double eta = 0.0;
        for (std::size_t j = 0; j < kTrueDim; ++j) eta += x(i, j) * model.beta[j];
        t[i] = std::pow(stream.exponential() / (scale * std::exp(eta)), 1.0 / shape);
        if (!(t[i] > 0.0) || !std::isfinite(t[i])) degenerate = true;
      }
      if (degenerate) {
        outcomes[r] = Outcome::degenerate;
        return;
      }
      auto [time_obs, status] = apply_censoring(t, config.censor_rate, stream);
      SurvResponse resp{std::move(time_obs), std::move(status)};
      try {
        const FitSummary fit = fit_cox_nr(x, resp);
        outcomes[r] = fit.converged ? Outcome::ok : Outcome::nonconverged;
      } catch (const DivergenceError&) {
        outcomes[r] = Outcome::divergence;
      } catch (const SingularityError&) {
        outcomes[r] = Outcome::singular;
      } catch (const Error&) {
        outcomes[r] = Outcome::nonidentifiable;
      }
    });
    for (Outcome o : outcomes) {
      switch (o) {
        case Outcome::ok: break;
        case Outcome::degenerate: ++row.n_degenerate_times; break;
        case Outcome::divergence: ++row.n_divergence; break;
        case Outcome::singular: ++row.n_singular; break;
        case Outcome::nonidentifiable: ++row.n_nonidentifiable; break;
        case Outcome::nonconverged: ++row.n_nonconverged; break;
      }
    }
    row.n_failures = row.n_degenerate_times + row.n_divergence + row.n_singular +
                     row.n_nonidentifiable + row.n_nonconverged;
    row.failure_rate = static_cast<double>(row.n_failures) / static_cast<double>(row.n_replicates);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace survsim
