#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fida {

struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const { return rows * cols; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(Shape s);

/// Dense real-valued 2-D grid stored row-major. Values are not clamped;
/// the nominal pixel range [0, 255] only matters for PSNR and 8-bit export.
class Image {
 public:
  Image() = default;
  explicit Image(Shape shape, double fill = 0.0);
  Image(Shape shape, std::vector<double> data);

  Shape shape() const { return shape_; }
  std::size_t rows() const { return shape_.rows; }
  std::size_t cols() const { return shape_.cols; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * shape_.cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * shape_.cols + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  const std::vector<double>& values() const { return data_; }

  bool all_finite() const;

  friend bool operator==(const Image&, const Image&) = default;

 private:
  Shape shape_{};
  std::vector<double> data_;
};

/// Throws std::invalid_argument when shapes differ; `what` names the caller.
void require_same_shape(const Image& a, const Image& b, const char* what);
void require_shape(const Image& img, Shape expected, const char* what);

double dot(const Image& a, const Image& b);
double norm(const Image& a);
double distance(const Image& a, const Image& b);

// Elementwise helpers used by the solvers; all return new images.
Image operator+(const Image& a, const Image& b);
Image operator-(const Image& a, const Image& b);
Image operator*(double s, const Image& a);
/// a - s * b, evaluated per pixel as a[i] - s * b[i].
Image subtract_scaled(const Image& a, double s, const Image& b);

/// Cyclic shift: out(r, c) = in(r - dr mod rows, c - dc mod cols).
Image cyclic_shift(const Image& img, std::ptrdiff_t dr, std::ptrdiff_t dc);

/// Peak signal-to-noise ratio in dB with peak 255; +inf on identical images.
double psnr(const Image& reference, const Image& test);

/// Mean squared pixel difference.
double mse(const Image& reference, const Image& test);

}  // namespace fida
