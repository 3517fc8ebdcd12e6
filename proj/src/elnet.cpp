#include "survsim/elnet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "survsim/errors.hpp"
#include "survsim/kernels.hpp"

namespace survsim {

namespace {

constexpr std::size_t kPassBudget = 100000;
constexpr std::size_t kMaxOuter = 100;
constexpr double kDivergenceThreshold = 50.0;

inline double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

// Standardized copy of a design: zero mean, unit population variance per
// column. Constant columns become all-zero and their coefficients stay 0.
struct Standardized {
  Matrix xs;
  std::vector<double> mean, sd;

  explicit Standardized(const Matrix& x) : xs(x.rows(), x.cols()), mean(x.cols()), sd(x.cols()) {
    const std::size_t n = x.rows();
    for (std::size_t j = 0; j < x.cols(); ++j) {
      mean[j] = kernels::sum(x.col(j), n) / static_cast<double>(n);
      sd[j] = std::sqrt(kernels::centered_sumsq(x.col(j), n, mean[j]) / static_cast<double>(n));
      double* out = xs.col(j);
      const double* in = x.col(j);
      if (sd[j] > 0.0) {
        for (std::size_t i = 0; i < n; ++i) out[i] = (in[i] - mean[j]) / sd[j];
      }
    }
  }
};

// Cyclic coordinate descent for
//   (1/2n) sum_i w_i (z_i - xs.b)^2 + lambda sum_j mask_j (mix|b_j| + (1-mix)/2 b_j^2)
// on standardized columns. b and the residual r = z - xs.b are updated in
// place; w may be null for unit weights. Returns false when the pass budget
// runs out.
bool coord_descent(const Matrix& xs, const double* w, std::vector<double>& r,
                   std::vector<double>& b, const PenaltySpec& spec, double lambda, double tol,
                   std::size_t pass_budget) {
  const std::size_t n = xs.rows();
  const std::size_t p = xs.cols();
  const double nn = static_cast<double>(n);

  std::vector<double> v(p);
  for (std::size_t j = 0; j < p; ++j) {
    v[j] = (w ? kernels::wdot(w, xs.col(j), xs.col(j), n) : kernels::sumsq(xs.col(j), n)) / nn;
  }

  for (std::size_t pass = 0; pass < pass_budget; ++pass) {
    double max_change = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      if (v[j] == 0.0) continue;
      const double* xj = xs.col(j);
      const double rho =
          (w ? kernels::wdot(w, xj, r.data(), n) : kernels::dot(xj, r.data(), n)) / nn +
          v[j] * b[j];
      const double pen_l1 = spec.penalized(j) ? lambda * spec.mix : 0.0;
      const double pen_l2 = spec.penalized(j) ? lambda * (1.0 - spec.mix) : 0.0;
      const double bj = soft_threshold(rho, pen_l1) / (v[j] + pen_l2);
      const double delta = bj - b[j];
      if (delta != 0.0) {
        kernels::axpy(-delta, xj, r.data(), n);
        b[j] = bj;
        max_change = std::max(max_change, std::sqrt(v[j]) * std::fabs(delta));
      }
    }
    if (max_change < tol) return true;
  }
  return false;
}

std::vector<double> make_lambda_grid(double lambda_max, std::size_t n_lambda, double eps_ratio) {
  std::vector<double> grid(n_lambda);
  const double log_max = std::log(lambda_max);
  const double log_min = std::log(lambda_max * eps_ratio);
  for (std::size_t i = 0; i < n_lambda; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(n_lambda - 1);
    grid[i] = std::exp(log_max + f * (log_min - log_max));
  }
  grid.front() = lambda_max;
  grid.back() = lambda_max * eps_ratio;
  return grid;
}

void check_path_args(double mix, std::size_t n_lambda, double eps_ratio) {
  if (!(mix > 0.0) || mix > 1.0)
    throw InvalidParameterError("lambda_path: mix must lie in (0, 1]");
  if (n_lambda < 2) throw InvalidParameterError("lambda_path: need at least 2 grid values");
  if (!(eps_ratio > 0.0) || eps_ratio >= 1.0)
    throw InvalidParameterError("lambda_path: eps_ratio must lie in (0, 1)");
}

// Null-model score of the Gaussian problem: fit the unpenalized columns by
// least squares (intercept via centering), then score the penalized ones on
// the residual.
std::vector<double> gaussian_null_score(const Standardized& sx, const std::vector<double>& y,
                                        const std::vector<std::uint8_t>& mask) {
  const std::size_t n = sx.xs.rows();
  const std::size_t p = sx.xs.cols();
  const double ybar = kernels::sum(y.data(), n) / static_cast<double>(n);
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = y[i] - ybar;

  std::vector<std::size_t> free_cols;
  for (std::size_t j = 0; j < p; ++j) {
    if (!mask.empty() && mask[j] == 0 && sx.sd[j] > 0.0) free_cols.push_back(j);
  }
  if (!free_cols.empty()) {
    Matrix xf(n, free_cols.size());
    for (std::size_t c = 0; c < free_cols.size(); ++c) {
      std::copy(sx.xs.col(free_cols[c]), sx.xs.col(free_cols[c]) + n, xf.col(c));
    }
    LeastSquaresFit ls = qr_least_squares(xf, r);
    if (!ls.rank_deficient) {
      for (std::size_t c = 0; c < free_cols.size(); ++c) {
        kernels::axpy(-ls.coef[c], xf.col(c), r.data(), n);
      }
    }
  }

  std::vector<double> score(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    score[j] = kernels::dot(sx.xs.col(j), r.data(), n);
  }
  return score;
}

// Null-model score of the Cox problem: eta-gradient at beta = 0 (after
// fitting unpenalized columns, when present) dotted with each column.
std::vector<double> cox_null_score(const Standardized& sx, const SurvResponse& resp,
                                   const std::vector<std::uint8_t>& mask) {
  const std::size_t n = sx.xs.rows();
  const std::size_t p = sx.xs.cols();

  std::vector<double> eta(n, 0.0);
  std::vector<std::size_t> free_cols;
  for (std::size_t j = 0; j < p; ++j) {
    if (!mask.empty() && mask[j] == 0 && sx.sd[j] > 0.0) free_cols.push_back(j);
  }
  if (!free_cols.empty()) {
    Matrix xf(n, free_cols.size());
    for (std::size_t c = 0; c < free_cols.size(); ++c) {
      std::copy(sx.xs.col(free_cols[c]), sx.xs.col(free_cols[c]) + n, xf.col(c));
    }
    FitSummary sub = fit_cox_nr(xf, resp);
    for (std::size_t c = 0; c < free_cols.size(); ++c) {
      kernels::axpy(sub.coef[c], xf.col(c), eta.data(), n);
    }
  }

  const CoxOrdering ord = CoxOrdering::make(resp);
  std::vector<double> grad(n), hess(n);
  cox_loglik_eta_derivs(ord, resp, eta, grad.data(), hess.data());

  std::vector<double> score(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    score[j] = kernels::dot(sx.xs.col(j), grad.data(), n);
  }
  return score;
}

double lambda_max_from_score(const std::vector<double>& score,
                             const std::vector<std::uint8_t>& mask, const Standardized& sx,
                             double mix, std::size_t n) {
  double smax = 0.0;
  for (std::size_t j = 0; j < score.size(); ++j) {
    const bool penalized = mask.empty() || mask[j] != 0;
    if (penalized && sx.sd[j] > 0.0) smax = std::max(smax, std::fabs(score[j]));
  }
  if (smax == 0.0) {
    throw DegeneratePathError("lambda_path: null-model score is zero for every penalized column");
  }
  return smax / (static_cast<double>(n) * mix);
}

// ---------------------------------------------------------------------------
// Cox outer loop on a standardized design
// ---------------------------------------------------------------------------

struct CoxWork {
  std::vector<double> eta;           // xs . b, maintained across lambdas
  std::vector<double> score, b_prev, hu;
  Matrix info;

  CoxWork(std::size_t n, std::size_t p)
      : eta(n, 0.0), score(p), b_prev(p), hu(p), info(p, p) {}
};

double penalty_value(const std::vector<double>& b, const PenaltySpec& spec, double lambda) {
  double pen = 0.0;
  for (std::size_t j = 0; j < b.size(); ++j) {
    if (spec.penalized(j)) {
      pen += spec.mix * std::fabs(b[j]) + 0.5 * (1.0 - spec.mix) * b[j] * b[j];
    }
  }
  return lambda * pen;
}

void recompute_eta(const Matrix& xs, const std::vector<double>& b, std::vector<double>& eta) {
  eta.assign(xs.rows(), 0.0);
  for (std::size_t j = 0; j < xs.cols(); ++j) {
    if (b[j] != 0.0) kernels::axpy(b[j], xs.col(j), eta.data(), xs.rows());
  }
}

// Coordinate descent on the penalized quadratic subproblem
//   min_u -(1/n)[score.u - u^T info u / 2] + lambda sum_j mask_j (mix|b0+u|_j + ...)
// where u = b - b0. info is p x p so a full pass costs O(p^2); work.hu keeps
// info.u up to date. Returns false when the pass budget runs out.
bool cd_quadratic(const std::vector<double>& score, const Matrix& info, std::size_t n,
                  const PenaltySpec& spec, double lambda, double tol,
                  const std::vector<double>& b0, std::vector<double>& b,
                  std::vector<double>& hu) {
  const std::size_t p = score.size();
  const double nn = static_cast<double>(n);
  std::fill(hu.begin(), hu.end(), 0.0);
  for (std::size_t k = 0; k < p; ++k) {
    const double u = b[k] - b0[k];
    if (u != 0.0) {
      for (std::size_t j = 0; j < p; ++j) hu[j] += info(j, k) * u;
    }
  }
  for (std::size_t pass = 0; pass < kPassBudget; ++pass) {
    double max_change = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double a = info(j, j) / nn;
      const double pen_l1 = spec.penalized(j) ? lambda * spec.mix : 0.0;
      const double pen_l2 = spec.penalized(j) ? lambda * (1.0 - spec.mix) : 0.0;
      if (a + pen_l2 <= 1e-300) continue;  // no curvature, no shrinkage target
      const double uj = b[j] - b0[j];
      const double rho = (score[j] - (hu[j] - info(j, j) * uj)) / nn + a * b0[j];
      const double bj = soft_threshold(rho, pen_l1) / (a + pen_l2);
      const double delta = bj - b[j];
      if (delta != 0.0) {
        for (std::size_t k = 0; k < p; ++k) hu[k] += info(k, j) * delta;
        b[j] = bj;
        max_change = std::max(max_change, std::sqrt(a) * std::fabs(delta));
      }
    }
    if (max_change < tol) return true;
  }
  return false;
}

// One penalized Cox solve at a fixed lambda, warm-started from b on the
// standardized scale: proximal Newton with the full observed information in
// the quadratic subproblem and inner coordinate descent over it. One
// likelihood sweep per outer iteration; the step is halved toward the
// previous iterate whenever the penalized objective rises. work.eta must
// equal xs.b on entry (callers keep that invariant along a path); it holds
// again on exit.
void cox_elnet_solve(const Matrix& xs, const SurvResponse& resp, const CoxOrdering& ord,
                     const PenaltySpec& spec, double lambda, double tol, std::vector<double>& b,
                     CoxWork& work) {
  const std::size_t n = xs.rows();
  const std::size_t p = xs.cols();
  const double nn = static_cast<double>(n);
  const double outer_tol = 100.0 * tol;

  double obj_prev = std::numeric_limits<double>::infinity();
  for (std::size_t outer = 0; outer < kMaxOuter; ++outer) {
    double ll = cox_loglik_score_info(ord, resp, xs, work.eta, work.score, work.info);
    double obj = -ll / nn + penalty_value(b, spec, lambda);

    // step-halving toward the previous iterate keeps the objective monotone
    if (obj > obj_prev + 1e-10 * (std::fabs(obj_prev) + 1.0)) {
      int h = 0;
      for (; h < 30; ++h) {
        for (std::size_t j = 0; j < p; ++j) b[j] = 0.5 * (b[j] + work.b_prev[j]);
        recompute_eta(xs, b, work.eta);
        ll = cox_loglik_score_info(ord, resp, xs, work.eta, work.score, work.info);
        obj = -ll / nn + penalty_value(b, spec, lambda);
        if (obj <= obj_prev + 1e-10 * (std::fabs(obj_prev) + 1.0)) break;
      }
      if (h == 30) {
        b = work.b_prev;
        recompute_eta(xs, b, work.eta);
        return;  // no direction of improvement left at this precision
      }
    }

    work.b_prev = b;
    obj_prev = obj;
    if (!cd_quadratic(work.score, work.info, n, spec, lambda, tol, work.b_prev, b, work.hu)) {
      throw ConvergenceError("fit_cox_elnet: coordinate descent exhausted its pass budget", b);
    }

    double max_change = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double d = b[j] - work.b_prev[j];
      if (d != 0.0) kernels::axpy(d, xs.col(j), work.eta.data(), n);
      max_change = std::max(max_change, std::fabs(d));
    }

    for (std::size_t j = 0; j < p; ++j) {
      if (std::fabs(b[j]) > kDivergenceThreshold) {
        throw DivergenceError("fit_cox_elnet: coefficient for column " + std::to_string(j) +
                              " is diverging");
      }
    }
    if (max_change < outer_tol) return;
  }
  throw ConvergenceError("fit_cox_elnet: outer loop did not converge", b);
}

std::vector<std::size_t> make_folds(std::size_t n, std::size_t k, RandomStream& stream) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t j = i + stream.uniform_below(n - i);
    std::swap(idx[i], idx[j]);
  }
  std::vector<std::size_t> fold_of(n);
  const std::size_t base = n / k;
  const std::size_t extra = n % k;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    for (std::size_t c = 0; c < size; ++c) fold_of[idx[pos++]] = f;
  }
  return fold_of;
}

void finish_cv(CvResult& cv) {
  const std::size_t m = cv.lambda_grid.size();
  cv.index_min = 0;
  for (std::size_t i = 1; i < m; ++i) {
    if (cv.cv_mean[i] < cv.cv_mean[cv.index_min]) cv.index_min = i;
  }
  const double bound = cv.cv_mean[cv.index_min] + cv.cv_se[cv.index_min];
  cv.index_1se = cv.index_min;
  for (std::size_t i = 0; i < m; ++i) {
    if (cv.cv_mean[i] <= bound) {
      cv.index_1se = i;
      break;
    }
  }
  cv.lambda_min = cv.lambda_grid[cv.index_min];
  cv.lambda_1se = cv.lambda_grid[cv.index_1se];
}

}  // namespace

void PenaltySpec::validate(std::size_t p) const {
  if (!(mix > 0.0) || mix > 1.0) throw InvalidParameterError("PenaltySpec: mix must lie in (0, 1]");
  if (lambda < 0.0) throw InvalidParameterError("PenaltySpec: lambda must be nonnegative");
  if (!penalize_mask.empty() && penalize_mask.size() != p)
    throw InvalidParameterError("PenaltySpec: penalize_mask length mismatch");
}

std::vector<double> lambda_path(const Matrix& design, const std::vector<double>& response,
                                double mix, std::size_t n_lambda, double eps_ratio,
                                const std::vector<std::uint8_t>& penalize_mask) {
  check_path_args(mix, n_lambda, eps_ratio);
  if (design.rows() != response.size())
    throw InvalidParameterError("lambda_path: design/response size mismatch");
  Standardized sx(design);
  const auto score = gaussian_null_score(sx, response, penalize_mask);
  const double lmax = lambda_max_from_score(score, penalize_mask, sx, mix, design.rows());
  return make_lambda_grid(lmax, n_lambda, eps_ratio);
}

std::vector<double> lambda_path(const Matrix& design, const SurvResponse& resp, double mix,
                                std::size_t n_lambda, double eps_ratio,
                                const std::vector<std::uint8_t>& penalize_mask) {
  check_path_args(mix, n_lambda, eps_ratio);
  resp.validate();
  Standardized sx(design);
  const auto score = cox_null_score(sx, resp, penalize_mask);
  const double lmax = lambda_max_from_score(score, penalize_mask, sx, mix, design.rows());
  return make_lambda_grid(lmax, n_lambda, eps_ratio);
}

std::vector<double> fit_gaussian_elnet(const Matrix& design, const std::vector<double>& response,
                                       const PenaltySpec& spec, double tol) {
  const std::size_t n = design.rows();
  const std::size_t p = design.cols();
  spec.validate(p);
  if (n < 2) throw InvalidParameterError("fit_gaussian_elnet: need at least 2 observations");
  if (response.size() != n)
    throw InvalidParameterError("fit_gaussian_elnet: design/response size mismatch");

  Standardized sx(design);
  const double ybar = kernels::sum(response.data(), n) / static_cast<double>(n);
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = response[i] - ybar;

  std::vector<double> b(p, 0.0);
  if (!coord_descent(sx.xs, nullptr, r, b, spec, spec.lambda, tol, kPassBudget)) {
    throw ConvergenceError("fit_gaussian_elnet: pass budget exhausted", b);
  }

  std::vector<double> out(p + 1, 0.0);
  out[0] = ybar;
  for (std::size_t j = 0; j < p; ++j) {
    if (sx.sd[j] > 0.0) {
      out[j + 1] = b[j] / sx.sd[j];
      out[0] -= out[j + 1] * sx.mean[j];
    }
  }
  return out;
}

std::vector<double> fit_cox_elnet(const Matrix& design, const SurvResponse& resp,
                                  const PenaltySpec& spec, double tol) {
  const std::size_t n = design.rows();
  const std::size_t p = design.cols();
  spec.validate(p);
  resp.validate();
  if (n != resp.n()) throw InvalidParameterError("fit_cox_elnet: design/response size mismatch");

  Standardized sx(design);
  const CoxOrdering ord = CoxOrdering::make(resp);
  CoxWork work(n, p);
  std::vector<double> b(p, 0.0);
  cox_elnet_solve(sx.xs, resp, ord, spec, spec.lambda, tol, b, work);

  std::vector<double> out(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    if (sx.sd[j] > 0.0) out[j] = b[j] / sx.sd[j];
  }
  return out;
}

CvResult cv_select_lambda(const Matrix& design, const std::vector<double>& response, double mix,
                          std::size_t k, RandomStream stream, std::size_t n_lambda,
                          double eps_ratio, double tol) {
  const std::size_t n = design.rows();
  const std::size_t p = design.cols();
  if (k < 2) throw InvalidParameterError("cv_select_lambda: need k >= 2 folds");
  if (n < 2 * k) throw InvalidParameterError("cv_select_lambda: need n >= 2k observations");

  CvResult cv;
  cv.lambda_grid = lambda_path(design, response, mix, n_lambda, eps_ratio);
  cv.fold_assignment = make_folds(n, k, stream);

  Matrix loss(k, n_lambda);
  PenaltySpec spec;
  spec.mix = mix;

  std::vector<std::size_t> train_rows, test_rows;
  for (std::size_t f = 0; f < k; ++f) {
    train_rows.clear();
    test_rows.clear();
    for (std::size_t i = 0; i < n; ++i) {
      (cv.fold_assignment[i] == f ? test_rows : train_rows).push_back(i);
    }
    Matrix xtr(train_rows.size(), p);
    std::vector<double> ytr(train_rows.size());
    for (std::size_t c = 0; c < p; ++c) {
      const double* src = design.col(c);
      double* dst = xtr.col(c);
      for (std::size_t i = 0; i < train_rows.size(); ++i) dst[i] = src[train_rows[i]];
    }
    for (std::size_t i = 0; i < train_rows.size(); ++i) ytr[i] = response[train_rows[i]];

    Standardized sx(xtr);
    const double ybar = kernels::sum(ytr.data(), ytr.size()) / static_cast<double>(ytr.size());
    std::vector<double> r(ytr.size());
    for (std::size_t i = 0; i < ytr.size(); ++i) r[i] = ytr[i] - ybar;

    std::vector<double> b(p, 0.0);
    for (std::size_t li = 0; li < n_lambda; ++li) {
      spec.lambda = cv.lambda_grid[li];
      if (!coord_descent(sx.xs, nullptr, r, b, spec, spec.lambda, tol, kPassBudget)) {
        throw ConvergenceError("cv_select_lambda: pass budget exhausted", b);
      }
      // held-out MSE on the original scale
      double intercept = ybar;
      double mse = 0.0;
      std::vector<double> borig(p, 0.0);
      for (std::size_t j = 0; j < p; ++j) {
        if (sx.sd[j] > 0.0) {
          borig[j] = b[j] / sx.sd[j];
          intercept -= borig[j] * sx.mean[j];
        }
      }
      for (std::size_t t : test_rows) {
        double pred = intercept;
        for (std::size_t j = 0; j < p; ++j) pred += borig[j] * design(t, j);
        const double e = response[t] - pred;
        mse += e * e;
      }
      loss(f, li) = mse / static_cast<double>(test_rows.size());
    }
  }

  cv.cv_mean.resize(n_lambda);
  cv.cv_se.resize(n_lambda);
  for (std::size_t li = 0; li < n_lambda; ++li) {
    const double m = kernels::sum(loss.col(li), k) / static_cast<double>(k);
    cv.cv_mean[li] = m;
    cv.cv_se[li] = std::sqrt(kernels::centered_sumsq(loss.col(li), k, m) /
                             static_cast<double>(k - 1) / static_cast<double>(k));
  }
  finish_cv(cv);
  return cv;
}

CoxCvFit cox_elnet_cv_fit(const Matrix& design, const SurvResponse& resp, double mix,
                          std::size_t k, RandomStream stream, std::size_t n_lambda,
                          double eps_ratio, double tol) {
  const std::size_t n = design.rows();
  const std::size_t p = design.cols();
  if (k < 2) throw InvalidParameterError("cv_select_lambda: need k >= 2 folds");
  if (n < 2 * k) throw InvalidParameterError("cv_select_lambda: need n >= 2k observations");
  resp.validate();

  CoxCvFit out;
  CvResult& cv = out.cv;
  cv.lambda_grid = lambda_path(design, resp, mix, n_lambda, eps_ratio);

  PenaltySpec spec;
  spec.mix = mix;

  // Full-data path fit, reused for the selector's final coefficients.
  const CoxOrdering ord_full = CoxOrdering::make(resp);
  Standardized sx_full(design);
  out.path_coefs = Matrix(p, n_lambda);
  {
    CoxWork work(n, p);
    std::vector<double> b(p, 0.0);
    for (std::size_t li = 0; li < n_lambda; ++li) {
      spec.lambda = cv.lambda_grid[li];
      cox_elnet_solve(sx_full.xs, resp, ord_full, spec, spec.lambda, tol, b, work);
      double* col = out.path_coefs.col(li);
      for (std::size_t j = 0; j < p; ++j) {
        col[j] = sx_full.sd[j] > 0.0 ? b[j] / sx_full.sd[j] : 0.0;
      }
    }
  }

  // Event-bearing folds; the partition is redrawn when a fold has no events.
  std::vector<std::size_t> fold_events(k, 0);
  for (int attempt = 0;; ++attempt) {
    cv.fold_assignment = make_folds(n, k, stream);
    std::fill(fold_events.begin(), fold_events.end(), std::size_t{0});
    for (std::size_t i = 0; i < n; ++i) {
      if (resp.status[i]) ++fold_events[cv.fold_assignment[i]];
    }
    if (*std::min_element(fold_events.begin(), fold_events.end()) > 0) break;
    if (attempt >= 10) {
      throw FoldFailureError("cv_select_lambda: could not build event-bearing folds");
    }
  }

  Matrix loss(k, n_lambda);
  std::vector<std::size_t> train_rows;
  std::vector<double> eta_full(n);
  for (std::size_t f = 0; f < k; ++f) {
    train_rows.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (cv.fold_assignment[i] != f) train_rows.push_back(i);
    }
    const std::size_t ntr = train_rows.size();
    Matrix xtr(ntr, p);
    SurvResponse rtr;
    rtr.time.resize(ntr);
    rtr.status.resize(ntr);
    for (std::size_t c = 0; c < p; ++c) {
      const double* src = design.col(c);
      double* dst = xtr.col(c);
      for (std::size_t i = 0; i < ntr; ++i) dst[i] = src[train_rows[i]];
    }
    for (std::size_t i = 0; i < ntr; ++i) {
      rtr.time[i] = resp.time[train_rows[i]];
      rtr.status[i] = resp.status[train_rows[i]];
    }

    Standardized sx(xtr);
    const CoxOrdering ord_tr = CoxOrdering::make(rtr);
    CoxWork work(ntr, p);
    std::vector<double> b(p, 0.0), borig(p);

    for (std::size_t li = 0; li < n_lambda; ++li) {
      spec.lambda = cv.lambda_grid[li];
      cox_elnet_solve(sx.xs, rtr, ord_tr, spec, spec.lambda, tol, b, work);
      for (std::size_t j = 0; j < p; ++j) {
        borig[j] = sx.sd[j] > 0.0 ? b[j] / sx.sd[j] : 0.0;
      }
      // Verweij-van Houwelingen: fold deviance 2[l(train) - l(all)] at the
      // training coefficients, per fold event. The training log partial
      // likelihood reuses the solver's eta (the partial likelihood is
      // invariant to the standardization's constant shift).
      const double l_train = cox_partial_loglik(ord_tr, rtr, work.eta);
      eta_full.assign(n, 0.0);
      for (std::size_t j = 0; j < p; ++j) {
        if (borig[j] != 0.0) kernels::axpy(borig[j], design.col(j), eta_full.data(), n);
      }
      const double l_all = cox_partial_loglik(ord_full, resp, eta_full);
      loss(f, li) = 2.0 * (l_train - l_all) / static_cast<double>(fold_events[f]);
    }
  }

  // Event-weighted fold mean and standard error (the cited solver's
  // convention for this family).
  double wsum = 0.0;
  for (std::size_t f = 0; f < k; ++f) wsum += static_cast<double>(fold_events[f]);
  cv.cv_mean.resize(n_lambda);
  cv.cv_se.resize(n_lambda);
  for (std::size_t li = 0; li < n_lambda; ++li) {
    double m = 0.0;
    for (std::size_t f = 0; f < k; ++f) m += static_cast<double>(fold_events[f]) * loss(f, li);
    m /= wsum;
    cv.cv_mean[li] = m;
    double var = 0.0;
    for (std::size_t f = 0; f < k; ++f) {
      const double d = loss(f, li) - m;
      var += static_cast<double>(fold_events[f]) * d * d;
    }
    cv.cv_se[li] = std::sqrt(var / wsum / static_cast<double>(k - 1));
  }
  finish_cv(cv);
  return out;
}

CvResult cv_select_lambda(const Matrix& design, const SurvResponse& resp, double mix,
                          std::size_t k, RandomStream stream, std::size_t n_lambda,
                          double eps_ratio, double tol) {
  return cox_elnet_cv_fit(design, resp, mix, k, stream, n_lambda, eps_ratio, tol).cv;
}

}  // namespace survsim
