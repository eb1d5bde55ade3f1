#include "fida/image.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fida {

std::string to_string(Shape s) { return std::to_string(s.rows) + "x" + std::to_string(s.cols); }

Image::Image(Shape shape, double fill) : shape_(shape), data_(shape.size(), fill) {
  if (shape.rows == 0 || shape.cols == 0) throw std::invalid_argument("image dimensions must be positive");
}

Image::Image(Shape shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
  if (shape.rows == 0 || shape.cols == 0) throw std::invalid_argument("image dimensions must be positive");
  if (data_.size() != shape.size())
    throw std::invalid_argument("image data length " + std::to_string(data_.size()) + " does not match shape " +
                                to_string(shape));
}

bool Image::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

void require_same_shape(const Image& a, const Image& b, const char* what) {
  if (a.shape() != b.shape())
    throw std::invalid_argument(std::string(what) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                                to_string(b.shape()));
}

void require_shape(const Image& img, Shape expected, const char* what) {
  if (img.shape() != expected)
    throw std::invalid_argument(std::string(what) + ": expected " + to_string(expected) + ", got " +
                                to_string(img.shape()));
}

double dot(const Image& a, const Image& b) {
  require_same_shape(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Image& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

double distance(const Image& a, const Image& b) {
  require_same_shape(a, b, "distance");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

Image operator+(const Image& a, const Image& b) {
  require_same_shape(a, b, "operator+");
  Image out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

Image operator-(const Image& a, const Image& b) {
  require_same_shape(a, b, "operator-");
  Image out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

Image operator*(double s, const Image& a) {
  Image out = a;
  for (double& v : out.data()) v *= s;
  return out;
}

Image subtract_scaled(const Image& a, double s, const Image& b) {
  require_same_shape(a, b, "subtract_scaled");
  Image out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - s * b[i];
  return out;
}

Image cyclic_shift(const Image& img, std::ptrdiff_t dr, std::ptrdiff_t dc) {
  const auto rows = static_cast<std::ptrdiff_t>(img.rows());
  const auto cols = static_cast<std::ptrdiff_t>(img.cols());
  Image out(img.shape());
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    const auto sr = static_cast<std::size_t>(((r - dr) % rows + rows) % rows);
    for (std::ptrdiff_t c = 0; c < cols; ++c) {
      const auto sc = static_cast<std::size_t>(((c - dc) % cols + cols) % cols);
      out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = img(sr, sc);
    }
  }
  return out;
}

double mse(const Image& reference, const Image& test) {
  require_same_shape(reference, test, "mse");
  double s = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double d = reference[i] - test[i];
    s += d * d;
  }
  return s / static_cast<double>(reference.size());
}

double psnr(const Image& reference, const Image& test) {
  const double m = mse(reference, test);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / m);
}

}  // namespace fida
