#include "survsim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "survsim/errors.hpp"
#include "survsim/kernels.hpp"

namespace survsim {

namespace {

// Keep log times inside the strictly-positive finite double range. Only
// degenerate baselines (shape_alpha near zero) ever get close.
constexpr double kMinLogTime = -700.0;
constexpr double kMaxLogTime = 700.0;
constexpr int kUnderflowRedraws = 64;

}  // namespace

TrueModel TrueModel::standard(double rho) {
  TrueModel m;
  m.beta.resize(kTrueDim);
  for (std::size_t j = 0; j < kTrueDim; ++j) m.beta[j] = static_cast<double>(j + 1);
  m.rho = rho;
  return m;
}

std::vector<double> ScenarioConfig::default_baseline_grid() {
  std::vector<double> grid;
  grid.reserve(191);
  for (int i = 10; i <= 200; ++i) grid.push_back(static_cast<double>(i) / 5.0);
  return grid;
}

std::size_t ScenarioConfig::n_events() const {
  return n - static_cast<std::size_t>(std::llround(static_cast<double>(n) * censor_rate));
}

void ScenarioConfig::validate() const {
  if (n < 1) throw InvalidParameterError("scenario: n must be >= 1");
  if (censor_rate < 0.0 || censor_rate >= 1.0)
    throw InvalidParameterError("scenario: censor_rate must lie in [0, 1)");
  if (rho < 0.0 || rho >= 1.0) throw InvalidParameterError("scenario: rho must lie in [0, 1)");
  if (static_cast<double>(n) * (1.0 - censor_rate) < 1.0)
    throw InvalidParameterError("scenario: expected event count below 1");
  if (replicates < 1) throw InvalidParameterError("scenario: replicates must be >= 1");
  if (baseline_grid.empty()) throw InvalidParameterError("scenario: empty baseline grid");
  for (double g : baseline_grid) {
    if (!(g > 0.0)) throw InvalidParameterError("scenario: baseline grid values must be positive");
  }
  if (solver.mix <= 0.0 || solver.mix > 1.0)
    throw InvalidParameterError("scenario: mix must lie in (0, 1]");
}

std::size_t SimDataset::n_events() const {
  return static_cast<std::size_t>(std::count(status.begin(), status.end(), std::uint8_t{1}));
}

Matrix sample_mvn(std::size_t n, std::size_t dim, double rho, RandomStream& stream) {
  if (n < 1 || dim < 1) throw InvalidParameterError("sample_mvn: n and dim must be >= 1");
  if (rho < 0.0 || rho >= 1.0)
    throw InvalidParameterError("sample_mvn: rho must lie in [0, 1) for a valid factorization");

  Matrix chol(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) chol(i, j) = (i == j) ? 1.0 : rho;
  }
  if (!cholesky_lower(chol)) {
    throw InvalidParameterError("sample_mvn: correlation matrix is not positive definite");
  }

  Matrix x(n, dim);
  std::vector<double> z(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dim; ++j) z[j] = stream.normal();
    for (std::size_t j = 0; j < dim; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k <= j; ++k) s += chol(j, k) * z[k];
      x(i, j) = s;
    }
  }
  return x;
}

BaselineParams draw_baseline_params(const std::vector<double>& grid, RandomStream& stream) {
  if (grid.empty()) throw InvalidParameterError("draw_baseline_params: empty grid");
  for (double g : grid) {
    if (!(g > 0.0)) throw InvalidParameterError("draw_baseline_params: grid values must be positive");
  }
  BaselineParams p;
  p.shape_alpha = grid[stream.uniform_below(grid.size())];
  p.scale_lambda = grid[stream.uniform_below(grid.size())];
  return p;
}

std::vector<double> gen_survival_times(const Matrix& x_true, const std::vector<double>& beta,
                                       const BaselineParams& params, RandomStream& stream) {
  const std::size_t n = x_true.rows();
  const std::size_t dim = x_true.cols();
  if (beta.size() != dim)
    throw InvalidParameterError("gen_survival_times: beta length does not match design");
  if (!(params.shape_alpha > 0.0) || !(params.scale_lambda > 0.0))
    throw InvalidParameterError("gen_survival_times: baseline parameters must be positive");

  std::vector<double> eta(n, 0.0);
  for (std::size_t j = 0; j < dim; ++j) {
    if (beta[j] != 0.0) kernels::axpy(beta[j], x_true.col(j), eta.data(), n);
  }

  const double log_scale = std::log(params.scale_lambda);
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(eta[i])) {
      throw GenerationError("gen_survival_times: non-finite linear predictor at row " +
                            std::to_string(i));
    }
    double log_t = (std::log(stream.exponential()) - log_scale - eta[i]) / params.shape_alpha;
    // Redraw the exponential variate when the time would round to zero; clamp
    // only if the regime leaves no representable value.
    for (int r = 0; r < kUnderflowRedraws && log_t < kMinLogTime; ++r) {
      log_t = (std::log(stream.exponential()) - log_scale - eta[i]) / params.shape_alpha;
    }
    log_t = std::clamp(log_t, kMinLogTime, kMaxLogTime);
    t[i] = std::exp(log_t);
  }
  return t;
}

std::pair<std::vector<double>, std::vector<std::uint8_t>> apply_censoring(
    const std::vector<double>& times, double censor_rate, RandomStream& stream) {
  if (censor_rate < 0.0 || censor_rate >= 1.0)
    throw InvalidParameterError("apply_censoring: censor_rate must lie in [0, 1)");
  const std::size_t n = times.size();
  const std::size_t m =
      static_cast<std::size_t>(std::llround(static_cast<double>(n) * censor_rate));

  std::vector<double> time_obs = times;
  std::vector<std::uint8_t> status(n, 1);

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + stream.uniform_below(n - i);
    std::swap(idx[i], idx[j]);
  }
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t i = idx[k];
    double u = stream.u01();
    while (u == 0.0) u = stream.u01();
    time_obs[i] = u * times[i];
    status[i] = 0;
  }
  return {std::move(time_obs), std::move(status)};
}

SimDataset assemble_dataset(const ScenarioConfig& config, const TrueModel& model,
                            RandomStream& stream) {
  config.validate();
  if (model.beta.size() != kTrueDim)
    throw InvalidParameterError("assemble_dataset: true model must have 10 coefficients");

  SimDataset ds;
  ds.baseline = draw_baseline_params(config.baseline_grid, stream);

  const Matrix x_true = sample_mvn(config.n, kTrueDim, model.rho, stream);
  const std::vector<double> t = gen_survival_times(x_true, model.beta, ds.baseline, stream);
  auto [time_obs, status] = apply_censoring(t, config.censor_rate, stream);
  ds.time_obs = std::move(time_obs);
  ds.status = std::move(status);

  // 5 observed true features: a uniform 5-subset of {0..9}, kept ascending.
  std::array<std::size_t, kTrueDim> pool;
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < kObservedTrue; ++i) {
    const std::size_t j = i + stream.uniform_below(kTrueDim - i);
    std::swap(pool[i], pool[j]);
  }
  std::copy(pool.begin(), pool.begin() + kObservedTrue, ds.true_ids.begin());
  std::sort(ds.true_ids.begin(), ds.true_ids.end());
  for (std::size_t k = 0; k < kObservedTrue; ++k) {
    ds.true_beta_obs[k] = model.beta[ds.true_ids[k]];
  }

  const Matrix noise = sample_mvn(config.n, kNoiseDim, model.rho, stream);

  ds.x_obs = Matrix(config.n, kObservedDim);
  for (std::size_t k = 0; k < kObservedTrue; ++k) {
    std::copy(x_true.col(ds.true_ids[k]), x_true.col(ds.true_ids[k]) + config.n,
              ds.x_obs.col(k));
  }
  for (std::size_t k = 0; k < kNoiseDim; ++k) {
    std::copy(noise.col(k), noise.col(k) + config.n, ds.x_obs.col(kObservedTrue + k));
  }
  return ds;
}

}  // namespace survsim
