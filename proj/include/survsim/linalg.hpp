#pragma once

#include <cstddef>
#include <vector>

namespace survsim {

// Dense column-major matrix. Columns are contiguous so the data-parallel
// kernels can run straight down them.
class Matrix {
 public:
  Matrix() : rows_(0), cols_(0) {}
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }

  double* col(std::size_t j) { return data_.data() + j * rows_; }
  const double* col(std::size_t j) const { return data_.data() + j * rows_; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_, cols_;
  std::vector<double> data_;
};

// In-place lower Cholesky factor of a symmetric positive-definite matrix.
// Returns false (leaving a partially overwritten) when a pivot is not
// strictly positive.
bool cholesky_lower(Matrix& a);

// Solve L L^T x = b given the lower factor.
void cholesky_solve(const Matrix& chol, const double* b, double* x);

// (L L^T)^{-1} from the lower factor; used for covariance matrices.
Matrix cholesky_invert(const Matrix& chol);

// Householder-QR least squares min ||y - X b||. Detects rank deficiency and
// reports the first dependent column.
struct LeastSquaresFit {
  std::vector<double> coef;
  double rss = 0.0;
  Matrix r;  // p x p upper triangular factor
  bool rank_deficient = false;
  std::size_t deficient_col = 0;
};

LeastSquaresFit qr_least_squares(const Matrix& x, const std::vector<double>& y);

// (X^T X)^{-1} from the R factor of the QR decomposition.
Matrix rtr_inverse(const Matrix& r);

}  // namespace survsim
