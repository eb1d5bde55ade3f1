#include "fida/operators.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fida/fft.hpp"
#include "fida/rng.hpp"

namespace fida {

namespace {

std::vector<std::size_t> wrap_table(std::size_t n, std::size_t taps, std::size_t half) {
  // index (i + t - half) mod n for i in [0, n), t in [0, taps)
  std::vector<std::size_t> table(n * taps);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t t = 0; t < taps; ++t) table[i * taps + t] = (i + t + n - half % n) % n;
  return table;
}

}  // namespace

ForwardOperator ForwardOperator::convolution(Shape shape, Image kernel, ConvolutionPath path) {
  if (kernel.rows() % 2 == 0 || kernel.cols() % 2 == 0)
    throw std::invalid_argument("convolution kernel dimensions must be odd");
  if (kernel.rows() > shape.rows || kernel.cols() > shape.cols)
    throw std::invalid_argument("convolution kernel " + to_string(kernel.shape()) + " larger than image " +
                                to_string(shape));
  if (!kernel.all_finite()) throw std::invalid_argument("convolution kernel has non-finite entries");

  ForwardOperator op;
  op.kind_ = OperatorKind::circular_convolution;
  op.input_shape_ = shape;
  op.output_shape_ = shape;
  op.kernel_ = std::move(kernel);

  const std::size_t rh = op.kernel_.rows() / 2;
  const std::size_t rw = op.kernel_.cols() / 2;
  std::vector<double> wrapped(shape.size(), 0.0);
  for (std::size_t a = 0; a < op.kernel_.rows(); ++a)
    for (std::size_t b = 0; b < op.kernel_.cols(); ++b) {
      const std::size_t r = (a + shape.rows - rh) % shape.rows;
      const std::size_t c = (b + shape.cols - rw) % shape.cols;
      wrapped[r * shape.cols + c] += op.kernel_(a, b);
    }
  RealFft2d fft(shape);
  auto spectrum = std::make_shared<std::vector<std::complex<double>>>(fft.spectrum_size());
  fft.forward(wrapped, *spectrum);
  op.spectrum_ = std::move(spectrum);

  switch (path) {
    case ConvolutionPath::direct: op.use_fft_ = false; break;
    case ConvolutionPath::fft: op.use_fft_ = true; break;
    case ConvolutionPath::automatic:
      op.use_fft_ = std::min(op.kernel_.rows(), op.kernel_.cols()) > 9;
      break;
  }

  Fnv1a h;
  h.str("conv").u64(shape.rows).u64(shape.cols).u64(op.kernel_.rows()).u64(op.kernel_.cols());
  for (double v : op.kernel_.data()) h.f64(v);
  op.hash_ = h.digest();
  return op;
}

ForwardOperator ForwardOperator::gain(Image gains) {
  for (double g : gains.data())
    if (!std::isfinite(g) || g < 0.0) throw std::invalid_argument("gains must be finite and nonnegative");
  ForwardOperator op;
  op.kind_ = OperatorKind::diagonal_gain;
  op.input_shape_ = gains.shape();
  op.output_shape_ = gains.shape();
  op.gains_ = std::move(gains);
  Fnv1a h;
  h.str("gain").u64(op.input_shape_.rows).u64(op.input_shape_.cols);
  for (double v : op.gains_.data()) h.f64(v);
  op.hash_ = h.digest();
  return op;
}

ForwardOperator ForwardOperator::explicit_matrix(Matrix matrix, Shape input_shape, Shape output_shape) {
  if (matrix.cols() != input_shape.size() || matrix.rows() != output_shape.size())
    throw std::invalid_argument("explicit operator: matrix is " + std::to_string(matrix.rows()) + "x" +
                                std::to_string(matrix.cols()) + " but shapes are " + to_string(output_shape) +
                                " <- " + to_string(input_shape));
  if (input_shape.size() == 0 || output_shape.size() == 0)
    throw std::invalid_argument("explicit operator: empty shape");
  ForwardOperator op;
  op.kind_ = OperatorKind::explicit_matrix;
  op.input_shape_ = input_shape;
  op.output_shape_ = output_shape;
  op.matrix_ = std::move(matrix);
  Fnv1a h;
  h.str("matrix").u64(input_shape.rows).u64(input_shape.cols).u64(output_shape.rows).u64(output_shape.cols);
  for (double v : op.matrix_.values()) h.f64(v);
  op.hash_ = h.digest();
  return op;
}

Image ForwardOperator::apply(const Image& x) const {
  require_shape(x, input_shape_, "ForwardOperator::apply");
  switch (kind_) {
    case OperatorKind::circular_convolution:
      return use_fft_ ? convolve_fft(x, false) : convolve_direct(x, false);
    case OperatorKind::diagonal_gain: {
      Image out = x;
      for (std::size_t i = 0; i < out.size(); ++i) out[i] *= gains_[i];
      return out;
    }
    case OperatorKind::explicit_matrix:
      return Image(output_shape_, matrix_.multiply(x.values()));
  }
  throw std::logic_error("unreachable operator kind");
}

Image ForwardOperator::adjoint(const Image& y) const {
  require_shape(y, output_shape_, "ForwardOperator::adjoint");
  switch (kind_) {
    case OperatorKind::circular_convolution:
      return use_fft_ ? convolve_fft(y, true) : convolve_direct(y, true);
    case OperatorKind::diagonal_gain: return apply(y);
    case OperatorKind::explicit_matrix:
      return Image(input_shape_, matrix_.multiply_transposed(y.values()));
  }
  throw std::logic_error("unreachable operator kind");
}

Image ForwardOperator::convolve_direct(const Image& x, bool transpose) const {
  const std::size_t rows = input_shape_.rows, cols = input_shape_.cols;
  const std::size_t kr = kernel_.rows(), kc = kernel_.cols();
  const std::size_t rh = kr / 2, rw = kc / 2;
  // Forward reads x(i - a + rh); with the reversed tap index a' = kr-1-a this
  // is x(i + a' - rh). The transpose reads x(i + a - rh) directly.
  const auto row_idx = wrap_table(rows, kr, rh);
  const auto col_idx = wrap_table(cols, kc, rw);
  Image out(input_shape_);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < kr; ++t) {
        const std::size_t a = transpose ? t : kr - 1 - t;
        const std::size_t src_r = row_idx[i * kr + t];
        for (std::size_t u = 0; u < kc; ++u) {
          const std::size_t b = transpose ? u : kc - 1 - u;
          s += kernel_(a, b) * x(src_r, col_idx[j * kc + u]);
        }
      }
      out(i, j) = s;
    }
  return out;
}

Image ForwardOperator::convolve_fft(const Image& x, bool transpose) const {
  RealFft2d fft(input_shape_);
  std::vector<std::complex<double>> spec(fft.spectrum_size());
  fft.forward(x.data(), spec);
  const auto& k = *spectrum_;
  for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= transpose ? std::conj(k[i]) : k[i];
  Image out(input_shape_);
  fft.inverse(spec, out.data());
  const double scale = 1.0 / static_cast<double>(input_shape_.size());
  for (double& v : out.data()) v *= scale;
  return out;
}

const Image& ForwardOperator::kernel() const {
  if (kind_ != OperatorKind::circular_convolution) throw std::logic_error("operator has no kernel");
  return kernel_;
}

const Image& ForwardOperator::gains() const {
  if (kind_ != OperatorKind::diagonal_gain) throw std::logic_error("operator has no gains");
  return gains_;
}

const Matrix& ForwardOperator::matrix() const {
  if (kind_ != OperatorKind::explicit_matrix) throw std::logic_error("operator has no explicit matrix");
  return matrix_;
}

const std::vector<std::complex<double>>& ForwardOperator::kernel_spectrum() const {
  if (kind_ != OperatorKind::circular_convolution) throw std::logic_error("operator has no kernel spectrum");
  return *spectrum_;
}

std::string ForwardOperator::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case OperatorKind::circular_convolution:
      os << "circular-convolution(" << to_string(input_shape_) << ", kernel " << to_string(kernel_.shape())
         << (use_fft_ ? ", fft" : ", direct") << ")";
      break;
    case OperatorKind::diagonal_gain: os << "diagonal-gain(" << to_string(input_shape_) << ")"; break;
    case OperatorKind::explicit_matrix:
      os << "explicit-matrix(" << to_string(output_shape_) << " <- " << to_string(input_shape_) << ")";
      break;
  }
  return os.str();
}

Image gaussian_kernel(double blur_sigma, std::size_t radius) {
  if (!(blur_sigma > 0.0) && radius > 0) throw std::invalid_argument("blur sigma must be positive");
  const std::size_t side = 2 * radius + 1;
  Image k(Shape{side, side});
  long double total = 0.0L;
  for (std::size_t a = 0; a < side; ++a)
    for (std::size_t b = 0; b < side; ++b) {
      const double dy = static_cast<double>(a) - static_cast<double>(radius);
      const double dx = static_cast<double>(b) - static_cast<double>(radius);
      const double v = radius == 0 ? 1.0 : std::exp(-(dx * dx + dy * dy) / (2.0 * blur_sigma * blur_sigma));
      k(a, b) = v;
      total += v;
    }
  for (double& v : k.data()) v = static_cast<double>(static_cast<long double>(v) / total);
  return k;
}

ForwardOperator make_gaussian_blur(Shape shape, double blur_sigma, std::size_t radius, ConvolutionPath path) {
  if (2 * radius + 1 > std::min(shape.rows, shape.cols))
    throw std::invalid_argument("blur radius " + std::to_string(radius) + " too large for image " +
                                to_string(shape));
  return ForwardOperator::convolution(shape, gaussian_kernel(blur_sigma, radius), path);
}

ForwardOperator make_stripe_gain(Shape shape, const std::vector<double>& gains, GainAxis axis) {
  const std::size_t expected = axis == GainAxis::columns ? shape.cols : shape.rows;
  if (gains.size() != expected)
    throw std::invalid_argument("stripe gain: expected " + std::to_string(expected) + " gains, got " +
                                std::to_string(gains.size()));
  for (double g : gains)
    if (!(g >= 0.0) || !std::isfinite(g)) throw std::invalid_argument("stripe gain: gains must be nonnegative");
  Image full(shape);
  for (std::size_t r = 0; r < shape.rows; ++r)
    for (std::size_t c = 0; c < shape.cols; ++c) full(r, c) = axis == GainAxis::columns ? gains[c] : gains[r];
  return ForwardOperator::gain(std::move(full));
}

std::vector<double> random_stripe_gains(std::size_t count, double lo, double hi, std::uint64_t seed) {
  if (!(lo >= 0.0) || !(hi >= lo)) throw std::invalid_argument("gain range must satisfy 0 <= lo <= hi");
  GaussianStream stream(RngSeed{seed});
  std::vector<double> g(count);
  for (double& v : g) v = lo + (hi - lo) * stream.uniform();
  return g;
}

ForwardOperator make_explicit(Matrix matrix, Shape input_shape, Shape output_shape) {
  return ForwardOperator::explicit_matrix(std::move(matrix), input_shape, output_shape);
}

}  // namespace fida
