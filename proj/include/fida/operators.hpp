#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "fida/image.hpp"
#include "fida/matrix.hpp"

namespace fida {

enum class OperatorKind { circular_convolution, diagonal_gain, explicit_matrix };

/// Which evaluation route a convolution uses. `automatic` picks the FFT once
/// the smaller kernel side exceeds 9 taps.
enum class ConvolutionPath { automatic, direct, fft };

enum class GainAxis { columns, rows };

/// The forward map A of y = A x + noise, with an exact adjoint.
///
/// Circular convolution uses periodic boundaries:
///   (A x)(i, j) = sum_{a,b} k(a, b) x(i - a + rh, j - b + rw)
/// for a centered kernel with half-sizes (rh, rw). Diagonal gain multiplies
/// pixelwise. Explicit matrices act on the row-major flattened image.
class ForwardOperator {
 public:
  static ForwardOperator convolution(Shape shape, Image kernel, ConvolutionPath path = ConvolutionPath::automatic);
  static ForwardOperator gain(Image gains);
  static ForwardOperator explicit_matrix(Matrix matrix, Shape input_shape, Shape output_shape);

  OperatorKind kind() const { return kind_; }
  Shape input_shape() const { return input_shape_; }
  Shape output_shape() const { return output_shape_; }

  Image apply(const Image& x) const;
  Image adjoint(const Image& y) const;

  /// Convolution kernel (convolution kind only).
  const Image& kernel() const;
  /// Per-pixel gains (gain kind only).
  const Image& gains() const;
  /// Dense matrix (explicit kind only).
  const Matrix& matrix() const;
  /// Unnormalized half-spectrum DFT of the wrapped kernel; these are the
  /// eigenvalues of the circulant operator (convolution kind only).
  const std::vector<std::complex<double>>& kernel_spectrum() const;

  bool is_shift_invariant() const { return kind_ == OperatorKind::circular_convolution; }
  bool uses_fft() const { return use_fft_; }

  /// Stable content hash (kind, shapes, parameters) for cache keys.
  std::uint64_t hash() const { return hash_; }
  std::string describe() const;

 private:
  ForwardOperator() = default;

  Image convolve_direct(const Image& x, bool transpose) const;
  Image convolve_fft(const Image& x, bool transpose) const;

  OperatorKind kind_ = OperatorKind::diagonal_gain;
  Shape input_shape_{};
  Shape output_shape_{};
  Image kernel_;
  Image gains_;
  Matrix matrix_;
  std::shared_ptr<const std::vector<std::complex<double>>> spectrum_;
  bool use_fft_ = false;
  std::uint64_t hash_ = 0;
};

inline Image apply(const ForwardOperator& op, const Image& x) { return op.apply(x); }
inline Image adjoint(const ForwardOperator& op, const Image& y) { return op.adjoint(y); }

/// Isotropic Gaussian of side 2*radius+1 sampled at integer offsets and
/// normalized to unit sum. radius 0 gives the identity.
Image gaussian_kernel(double blur_sigma, std::size_t radius);
ForwardOperator make_gaussian_blur(Shape shape, double blur_sigma, std::size_t radius,
                                   ConvolutionPath path = ConvolutionPath::automatic);

/// Striping gain: every pixel in column j (or row j) is scaled by gains[j].
ForwardOperator make_stripe_gain(Shape shape, const std::vector<double>& gains, GainAxis axis = GainAxis::columns);

/// Per-line gains drawn uniformly from [lo, hi] with a seeded stream.
std::vector<double> random_stripe_gains(std::size_t count, double lo, double hi, std::uint64_t seed);

ForwardOperator make_explicit(Matrix matrix, Shape input_shape, Shape output_shape);

}  // namespace fida
