#pragma once

#include <complex>
#include <memory>
#include <span>

#include "fida/image.hpp"

namespace fida {

/// Real 2-D DFT of a rows x cols grid onto the non-redundant half spectrum
/// rows x (cols/2 + 1). Transforms are unnormalized in both directions, so
/// inverse(forward(x)) = rows * cols * x. Plans are shared per shape and
/// execution is reentrant.
class RealFft2d {
 public:
  explicit RealFft2d(Shape shape);

  Shape shape() const { return shape_; }
  std::size_t half_cols() const { return shape_.cols / 2 + 1; }
  std::size_t spectrum_size() const { return shape_.rows * half_cols(); }

  void forward(std::span<const double> in, std::span<std::complex<double>> out) const;
  void inverse(std::span<const std::complex<double>> in, std::span<double> out) const;

  struct Plans;

 private:
  Shape shape_;
  std::shared_ptr<const Plans> plans_;
};

}  // namespace fida
