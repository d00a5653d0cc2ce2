#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qrisk {

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double value = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, value) {}

  static Matrix identity(std::size_t k);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool all_finite() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Thrown when a pivoted Cholesky factorization meets a nonpositive pivot.
// `pivot` is the original row/column index of the offending pivot.
struct NotPositiveDefinite : std::runtime_error {
  explicit NotPositiveDefinite(std::size_t pivot_index)
      : std::runtime_error("matrix is not positive definite (pivot " +
                           std::to_string(pivot_index) + ")"),
        pivot(pivot_index) {}
  std::size_t pivot;
};

Matrix multiply(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

// Solves A X = B for symmetric positive definite A via pivoted Cholesky.
Matrix solve_spd(const Matrix& a, const Matrix& b);

// tr(A^{-1} B) without forming the inverse.
double trace_solve_spd(const Matrix& a, const Matrix& b);

// (min, max) eigenvalues of a symmetric matrix, cyclic Jacobi iteration.
std::pair<double, double> eig_extremes(const Matrix& a);

double max_abs(const Matrix& a);

}  // namespace qrisk
