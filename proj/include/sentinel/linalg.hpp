#pragma once

// Dense row-major matrix and the handful of kernels the networks need.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "sentinel/error.hpp"

namespace sentinel {

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// y += W x, W is rows x cols.
inline void gemv_acc(std::span<const double> w, std::size_t rows, std::size_t cols, std::span<const double> x,
                     std::span<double> y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* wr = w.data() + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * x[c];
    y[r] += acc;
  }
}

// x += W^T y.
inline void gemv_t_acc(std::span<const double> w, std::size_t rows, std::size_t cols, std::span<const double> y,
                       std::span<double> x) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* wr = w.data() + r * cols;
    const double yr = y[r];
    for (std::size_t c = 0; c < cols; ++c) x[c] += wr[c] * yr;
  }
}

// W += y x^T.
inline void outer_acc(std::span<double> w, std::size_t rows, std::size_t cols, std::span<const double> y,
                      std::span<const double> x) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* wr = w.data() + r * cols;
    const double yr = y[r];
    for (std::size_t c = 0; c < cols; ++c) wr[c] += yr * x[c];
  }
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

// Solves A x = b in place for a small dense system (Gaussian elimination with
// partial pivoting). A is n x n row-major; b holds the solution on return.
inline void solve_dense(std::vector<double> a, std::vector<double>& b) {
  const std::size_t n = b.size();
  require(a.size() == n * n, ErrorKind::DimensionMismatch, "solve_dense: matrix is not square");
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
    }
    require(a[pivot * n + col] != 0.0, ErrorKind::InsufficientData, "solve_dense: singular system");
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
      std::swap(b[col], b[pivot]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = a[r * n + col] / a[col * n + col];
      if (factor == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= factor * a[col * n + c];
      b[r] -= factor * b[col];
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    double acc = b[i];
    for (std::size_t c = i + 1; c < n; ++c) acc -= a[i * n + c] * b[c];
    b[i] = acc / a[i * n + i];
  }
}

}  // namespace sentinel
