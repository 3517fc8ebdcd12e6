#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "survsim/linalg.hpp"
#include "survsim/rng.hpp"

namespace survsim {

inline constexpr std::size_t kTrueDim = 10;       // covariates in the true model
inline constexpr std::size_t kObservedTrue = 5;   // true features that are measured
inline constexpr std::size_t kNoiseDim = 5;       // noise features appended
inline constexpr std::size_t kObservedDim = 10;   // columns of every analysis matrix

// Weibull-type baseline cumulative hazard H0(t) = scale_lambda * t^shape_alpha.
struct BaselineParams {
  double shape_alpha = 1.0;
  double scale_lambda = 1.0;
};

struct TrueModel {
  std::vector<double> beta;  // log-hazard coefficients, (1,...,10) in standard runs
  double rho = 0.0;          // common pairwise feature correlation

  static TrueModel standard(double rho);
};

// Solver knobs shared by every selector; defaults match the reference runs.
struct SolverSettings {
  double mix = 1.0;                            // elastic-net mixing weight on the L1 term
  bool include_event_indicator_in_cox = false; // add status as a penalized Cox covariate
  double gaussian_elnet_lambda = 0.05;         // fixed penalty of the Gaussian elastic net
  std::size_t event_threshold = 900;           // pipeline branch point on event count
  std::size_t cv_folds = 10;
  std::size_t n_lambda = 100;
  double eps_ratio = 0.01;                     // last path value = lambda_max * eps_ratio
  double cd_tol = 1e-7;                        // coordinate-descent coefficient tolerance
};

struct ScenarioConfig {
  std::size_t n = 500;
  double censor_rate = 0.1;
  double rho = 0.0;
  std::size_t replicates = 1;
  std::uint64_t master_seed = 0;
  std::uint64_t scenario_id = 0;
  std::vector<double> baseline_grid = default_baseline_grid();
  SolverSettings solver;

  // The grid {2.0, 2.2, ..., 40.0}: 191 values.
  static std::vector<double> default_baseline_grid();

  std::size_t n_events() const;  // n - round(n * censor_rate)
  void validate() const;         // throws InvalidParameterError
};

// One simulated replicate as the selectors see it: 10 observed columns
// (0..4 observed true features, 5..9 noise), observation times and event
// indicators, plus the bookkeeping needed for scoring.
struct SimDataset {
  Matrix x_obs;                                 // n x 10
  std::vector<double> time_obs;                 // strictly positive, finite
  std::vector<std::uint8_t> status;             // 1 = event
  std::array<std::size_t, kObservedTrue> true_ids;  // 0-based indices into beta, ascending
  std::array<double, kObservedTrue> true_beta_obs;
  BaselineParams baseline;

  std::size_t n() const { return time_obs.size(); }
  std::size_t n_events() const;
};

// i.i.d. rows from N(0, C) with C unit-diagonal and constant off-diagonal
// rho, realized through the lower Cholesky factor of C.
Matrix sample_mvn(std::size_t n, std::size_t dim, double rho, RandomStream& stream);

// Both baseline parameters drawn independently and uniformly from the grid.
BaselineParams draw_baseline_params(const std::vector<double>& grid, RandomStream& stream);

// Inverse-transform sampling under H(t|x) = scale * t^shape * exp(x.beta):
// T = (E / (scale * exp(x.beta)))^(1/shape) with E unit exponential.
std::vector<double> gen_survival_times(const Matrix& x_true, const std::vector<double>& beta,
                                       const BaselineParams& params, RandomStream& stream);

// Exactly round(n * censor_rate) subjects, chosen uniformly without
// replacement, get status 0 and a Uniform(0, T_i) observation time.
std::pair<std::vector<double>, std::vector<std::uint8_t>> apply_censoring(
    const std::vector<double>& times, double censor_rate, RandomStream& stream);

SimDataset assemble_dataset(const ScenarioConfig& config, const TrueModel& model,
                            RandomStream& stream);

}  // namespace survsim
