#include "survsim/linalg.hpp"

#include <cmath>
#include <cstddef>

#include "survsim/kernels.hpp"

namespace survsim {

bool cholesky_lower(Matrix& a) {
  const std::size_t n = a.rows();
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
    if (d <= 0.0 || !std::isfinite(d)) return false;
    const double ljj = std::sqrt(d);
    a(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
      a(i, j) = s / ljj;
    }
    for (std::size_t k = j + 1; k < n; ++k) a(j, k) = 0.0;
  }
  return true;
}

void cholesky_solve(const Matrix& chol, const double* b, double* x) {
  const std::size_t n = chol.rows();
  // forward: L z = b
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= chol(i, k) * x[k];
    x[i] = s / chol(i, i);
  }
  // backward: L^T x = z
  for (std::size_t ii = n; ii-- > 0;) {
    double s = x[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= chol(k, ii) * x[k];
    x[ii] = s / chol(ii, ii);
  }
}

Matrix cholesky_invert(const Matrix& chol) {
  const std::size_t n = chol.rows();
  Matrix inv(n, n);
  std::vector<double> e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    cholesky_solve(chol, e.data(), inv.col(j));
    e[j] = 0.0;
  }
  return inv;
}

LeastSquaresFit qr_least_squares(const Matrix& x, const std::vector<double>& y) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  Matrix a = x;
  std::vector<double> qty = y;
  std::vector<double> col_norm(p);
  for (std::size_t j = 0; j < p; ++j) {
    col_norm[j] = std::sqrt(kernels::sumsq(a.col(j), n));
  }

  LeastSquaresFit fit;
  fit.coef.assign(p, 0.0);
  fit.r = Matrix(p, p);

  std::vector<double> v(n);
  for (std::size_t k = 0; k < p; ++k) {
    double* ak = a.col(k);
    const std::size_t m = n - k;
    const double norm = std::sqrt(kernels::sumsq(ak + k, m));
    if (norm <= 1e-10 * (col_norm[k] > 0.0 ? col_norm[k] : 1.0)) {
      fit.rank_deficient = true;
      fit.deficient_col = k;
      return fit;
    }
    const double alpha = ak[k] >= 0.0 ? -norm : norm;
    // reflector v = x - alpha e1, applied as H = I - 2 v v^T / (v^T v)
    for (std::size_t i = 0; i < m; ++i) v[i] = ak[k + i];
    v[0] -= alpha;
    const double vtv = kernels::sumsq(v.data(), m);
    ak[k] = alpha;
    for (std::size_t i = 1; i < m; ++i) ak[k + i] = 0.0;
    if (vtv > 0.0) {
      for (std::size_t j = k + 1; j < p; ++j) {
        double* aj = a.col(j) + k;
        const double c = -2.0 * kernels::dot(v.data(), aj, m) / vtv;
        kernels::axpy(c, v.data(), aj, m);
      }
      double* yk = qty.data() + k;
      const double c = -2.0 * kernels::dot(v.data(), yk, m) / vtv;
      kernels::axpy(c, v.data(), yk, m);
    }
  }

  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i <= j; ++i) fit.r(i, j) = a(i, j);
  }
  // back substitution R b = (Q^T y)[0:p]
  for (std::size_t ii = p; ii-- > 0;) {
    double s = qty[ii];
    for (std::size_t k = ii + 1; k < p; ++k) s -= fit.r(ii, k) * fit.coef[k];
    fit.coef[ii] = s / fit.r(ii, ii);
  }
  fit.rss = kernels::sumsq(qty.data() + p, n - p);
  return fit;
}

Matrix rtr_inverse(const Matrix& r) {
  const std::size_t p = r.rows();
  // R^{-1} by back substitution against the identity, then R^{-1} R^{-T}.
  Matrix rinv(p, p);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t ii = j + 1; ii-- > 0;) {
      double s = (ii == j) ? 1.0 : 0.0;
      for (std::size_t k = ii + 1; k <= j; ++k) s -= r(ii, k) * rinv(k, j);
      rinv(ii, j) = s / r(ii, ii);
    }
  }
  Matrix out(p, p);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      double s = 0.0;
      for (std::size_t k = (i > j ? i : j); k < p; ++k) s += rinv(i, k) * rinv(j, k);
      out(i, j) = s;
    }
  }
  return out;
}

}  // namespace survsim
