#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace fida {

/// Small dense row-major matrix used for explicit operators, SVD factors and
/// file-loaded bases.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
      : rows_(rows), cols_(cols), data_(std::move(row_major)) {
    if (data_.size() != rows * cols) throw std::invalid_argument("matrix data length does not match dimensions");
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  const std::vector<double>& values() const { return data_; }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  /// y = M x
  std::vector<double> multiply(const std::vector<double>& x) const {
    if (x.size() != cols_) throw std::invalid_argument("matrix-vector dimension mismatch");
    std::vector<double> y(rows_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
      double s = 0.0;
      const double* row = &data_[r * cols_];
      for (std::size_t c = 0; c < cols_; ++c) s += row[c] * x[c];
      y[r] = s;
    }
    return y;
  }

  /// y = M^T x
  std::vector<double> multiply_transposed(const std::vector<double>& x) const {
    if (x.size() != rows_) throw std::invalid_argument("matrix-vector dimension mismatch");
    std::vector<double> y(cols_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
      const double xr = x[r];
      const double* row = &data_[r * cols_];
      for (std::size_t c = 0; c < cols_; ++c) y[c] += row[c] * xr;
    }
    return y;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace fida
