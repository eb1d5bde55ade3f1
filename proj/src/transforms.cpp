#include "fida/transforms.hpp"

#include <spdlog/spdlog.h>

#include <array>
#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>

#include "fida/fft.hpp"
#include "fida/io.hpp"
#include "fida/rng.hpp"

namespace fida {

namespace {

// Daubechies orthonormal lowpass (reconstruction) filters, sum = sqrt(2).
constexpr std::array<double, 2> kHaar{0.7071067811865476, 0.7071067811865476};
constexpr std::array<double, 4> kDb4{0.48296291314453416, 0.8365163037378079, 0.2241438680420134,
                                     -0.12940952255126037};
constexpr std::array<double, 6> kDb6{0.33267055295008263,  0.8068915093110925,   0.45987750211849154,
                                     -0.13501102001025458, -0.08544127388202666, 0.03522629188570953};
constexpr std::array<double, 8> kDb8{0.2303778133088965,   0.7148465705529157,   0.6308807679298589,
                                     -0.027983769416859854, -0.18703481171909309, 0.030841381835560764,
                                     0.0328830116668852,   -0.010597401785069032};
constexpr std::array<double, 12> kDb12{0.11154074335010947,  0.49462389039845306,   0.7511339080210954,
                                       0.31525035170919763,  -0.22626469396543983,  -0.12976686756726194,
                                       0.09750160558732304,  0.027522865530305727,  -0.03158203931748603,
                                       0.0005538422011614961, 0.004777257510945511, -0.0010773010853084796};

inline std::size_t wrap(std::size_t idx, std::size_t n) { return idx < n ? idx : idx % n; }

void analysis_1d(std::span<const double> h, std::span<const double> g, const double* in, double* out,
                 std::size_t n) {
  const std::size_t half = n / 2;
  const std::size_t taps = h.size();
  for (std::size_t k = 0; k < half; ++k) {
    double sa = 0.0, sd = 0.0;
    for (std::size_t m = 0; m < taps; ++m) {
      const double v = in[wrap(2 * k + m, n)];
      sa += h[m] * v;
      sd += g[m] * v;
    }
    out[k] = sa;
    out[half + k] = sd;
  }
}

void synthesis_1d(std::span<const double> h, std::span<const double> g, const double* in, double* out,
                  std::size_t n) {
  const std::size_t half = n / 2;
  const std::size_t taps = h.size();
  for (std::size_t i = 0; i < n; ++i) out[i] = 0.0;
  for (std::size_t k = 0; k < half; ++k) {
    const double a = in[k], d = in[half + k];
    for (std::size_t m = 0; m < taps; ++m) out[wrap(2 * k + m, n)] += h[m] * a + g[m] * d;
  }
}

std::shared_ptr<const CoefficientLayout> flat_layout(BasisKind kind, Shape shape) {
  auto l = std::make_shared<CoefficientLayout>();
  l->kind = kind;
  l->shape = shape;
  l->units = shape.size();
  l->unit_width = 1;
  return l;
}

}  // namespace

std::string to_string(BasisKind kind) {
  switch (kind) {
    case BasisKind::wavelet: return "wavelet";
    case BasisKind::dft: return "dft";
    case BasisKind::canonical: return "canonical";
    case BasisKind::svd: return "svd";
    case BasisKind::file: return "file";
  }
  return "unknown";
}

double CoefficientLayout::multiplicity(std::size_t unit) const {
  if (kind != BasisKind::dft) return 1.0;
  const std::size_t half_cols = shape.cols / 2 + 1;
  const std::size_t c = unit % half_cols;
  if (c == 0) return 1.0;
  if (shape.cols % 2 == 0 && c == shape.cols / 2) return 1.0;
  return 2.0;
}

bool CoefficientLayout::in_coarse_band(std::size_t unit) const {
  if (kind != BasisKind::wavelet || subbands.empty()) return false;
  return subbands.front().contains(unit / shape.cols, unit % shape.cols);
}

std::size_t CoefficientLayout::subband_of(std::size_t unit) const {
  const std::size_t r = unit / shape.cols, c = unit % shape.cols;
  for (std::size_t i = 0; i < subbands.size(); ++i)
    if (subbands[i].contains(r, c)) return i;
  throw std::out_of_range("coefficient unit outside every subband");
}

double coefficient_energy(const CoefficientVector& c) {
  const auto& l = *c.layout;
  double s = 0.0;
  for (std::size_t u = 0; u < l.units; ++u) {
    double e = 0.0;
    for (std::size_t w = 0; w < l.unit_width; ++w) {
      const double v = c.values[u * l.unit_width + w];
      e += v * v;
    }
    s += l.multiplicity(u) * e;
  }
  return s;
}

std::span<const double> daubechies_lowpass(int taps) {
  switch (taps) {
    case 2: return kHaar;
    case 4: return kDb4;
    case 6: return kDb6;
    case 8: return kDb8;
    case 12: return kDb12;
    default: throw std::invalid_argument("unsupported Daubechies tap count " + std::to_string(taps));
  }
}

OrthoBasis OrthoBasis::wavelet(Shape shape, int taps, int levels) {
  if (levels < 1) throw std::invalid_argument("wavelet levels must be positive");
  const std::size_t stride = std::size_t{1} << levels;
  if (shape.rows == 0 || shape.cols == 0 || shape.rows % stride != 0 || shape.cols % stride != 0)
    throw std::invalid_argument("image " + to_string(shape) + " is not divisible by 2^" + std::to_string(levels));
  const auto h = daubechies_lowpass(taps);

  OrthoBasis b;
  b.kind_ = BasisKind::wavelet;
  b.shape_ = shape;
  b.levels_ = levels;
  b.lowpass_.assign(h.begin(), h.end());
  const std::size_t n = h.size();
  b.highpass_.resize(n);
  for (std::size_t m = 0; m < n; ++m) b.highpass_[m] = (m % 2 == 0 ? 1.0 : -1.0) * h[n - 1 - m];

  auto layout = std::make_shared<CoefficientLayout>();
  layout->kind = BasisKind::wavelet;
  layout->shape = shape;
  layout->units = shape.size();
  layout->unit_width = 1;
  layout->subbands.push_back(
      Subband{levels, Orientation::approximation, 0, 0, shape.rows >> levels, shape.cols >> levels});
  for (int level = levels; level >= 1; --level) {
    const std::size_t hr = shape.rows >> level, hc = shape.cols >> level;
    layout->subbands.push_back(Subband{level, Orientation::lh, 0, hc, hr, hc});
    layout->subbands.push_back(Subband{level, Orientation::hl, hr, 0, hr, hc});
    layout->subbands.push_back(Subband{level, Orientation::hh, hr, hc, hr, hc});
  }
  b.layout_ = std::move(layout);

  Fnv1a id;
  id.str("wavelet").u64(shape.rows).u64(shape.cols).u64(static_cast<std::uint64_t>(taps)).u64(
      static_cast<std::uint64_t>(levels));
  b.id_ = id.digest();
  return b;
}

OrthoBasis OrthoBasis::dft(Shape shape) {
  OrthoBasis b;
  b.kind_ = BasisKind::dft;
  b.shape_ = shape;
  auto layout = std::make_shared<CoefficientLayout>();
  layout->kind = BasisKind::dft;
  layout->shape = shape;
  layout->units = shape.rows * (shape.cols / 2 + 1);
  layout->unit_width = 2;
  b.layout_ = std::move(layout);
  b.id_ = Fnv1a().str("dft").u64(shape.rows).u64(shape.cols).digest();
  return b;
}

OrthoBasis OrthoBasis::canonical(Shape shape) {
  OrthoBasis b;
  b.kind_ = BasisKind::canonical;
  b.shape_ = shape;
  b.layout_ = flat_layout(BasisKind::canonical, shape);
  b.id_ = Fnv1a().str("canonical").u64(shape.rows).u64(shape.cols).digest();
  return b;
}

OrthoBasis OrthoBasis::svd(SvdFactors factors, Shape input_shape, Shape output_shape) {
  const std::size_t n = input_shape.size();
  if (factors.right.rows() != n || factors.right.cols() != n || factors.singular_values.size() != n ||
      factors.left.rows() != output_shape.size() || factors.left.cols() != n)
    throw std::invalid_argument("svd basis: factor dimensions do not match shapes");
  OrthoBasis b;
  b.kind_ = BasisKind::svd;
  b.shape_ = input_shape;
  b.svd_output_shape_ = output_shape;
  b.layout_ = flat_layout(BasisKind::svd, input_shape);
  Fnv1a id;
  id.str("svd").u64(input_shape.rows).u64(input_shape.cols);
  for (double v : factors.right.values()) id.f64(v);
  for (double v : factors.singular_values) id.f64(v);
  b.id_ = id.digest();
  b.svd_ = std::make_shared<const SvdFactors>(std::move(factors));
  return b;
}

OrthoBasis OrthoBasis::from_matrix(Matrix columns, Shape shape) {
  if (columns.rows() != columns.cols()) throw std::invalid_argument("basis matrix must be square");
  if (columns.rows() != shape.size())
    throw std::invalid_argument("basis matrix size " + std::to_string(columns.rows()) + " does not match shape " +
                                to_string(shape));
  OrthoBasis b;
  b.kind_ = BasisKind::file;
  b.shape_ = shape;
  b.layout_ = flat_layout(BasisKind::file, shape);
  Fnv1a id;
  id.str("file").u64(shape.rows).u64(shape.cols);
  for (double v : columns.values()) id.f64(v);
  b.id_ = id.digest();
  b.matrix_ = std::make_shared<const Matrix>(std::move(columns));
  return b;
}

const SvdFactors& OrthoBasis::svd_factors() const {
  if (kind_ != BasisKind::svd) throw std::logic_error("basis has no SVD factors");
  return *svd_;
}

const Matrix& OrthoBasis::basis_matrix() const {
  if (kind_ != BasisKind::file) throw std::logic_error("basis has no stored matrix");
  return *matrix_;
}

std::string OrthoBasis::describe() const {
  std::ostringstream os;
  os << to_string(kind_) << "(" << to_string(shape_);
  if (kind_ == BasisKind::wavelet) os << ", taps=" << lowpass_.size() << ", levels=" << levels_;
  os << ")";
  return os.str();
}

void OrthoBasis::require_layout(const CoefficientVector& c) const {
  if (!c.layout || !(*c.layout == *layout_) || c.values.size() != layout_->value_count())
    throw std::invalid_argument("coefficient layout does not match basis " + describe());
}

CoefficientVector OrthoBasis::zeros() const {
  return CoefficientVector{layout_, std::vector<double>(layout_->value_count(), 0.0)};
}

void OrthoBasis::wavelet_forward(std::vector<double>& buf) const {
  const std::size_t cols = shape_.cols;
  std::vector<double> in(std::max(shape_.rows, shape_.cols)), out(in.size());
  for (int level = 1; level <= levels_; ++level) {
    const std::size_t r = shape_.rows >> (level - 1), c = shape_.cols >> (level - 1);
    for (std::size_t i = 0; i < r; ++i) {
      double* row = buf.data() + i * cols;
      analysis_1d(lowpass_, highpass_, row, out.data(), c);
      std::copy_n(out.data(), c, row);
    }
    for (std::size_t j = 0; j < c; ++j) {
      for (std::size_t i = 0; i < r; ++i) in[i] = buf[i * cols + j];
      analysis_1d(lowpass_, highpass_, in.data(), out.data(), r);
      for (std::size_t i = 0; i < r; ++i) buf[i * cols + j] = out[i];
    }
  }
}

void OrthoBasis::wavelet_inverse(std::vector<double>& buf) const {
  const std::size_t cols = shape_.cols;
  std::vector<double> in(std::max(shape_.rows, shape_.cols)), out(in.size());
  for (int level = levels_; level >= 1; --level) {
    const std::size_t r = shape_.rows >> (level - 1), c = shape_.cols >> (level - 1);
    for (std::size_t j = 0; j < c; ++j) {
      for (std::size_t i = 0; i < r; ++i) in[i] = buf[i * cols + j];
      synthesis_1d(lowpass_, highpass_, in.data(), out.data(), r);
      for (std::size_t i = 0; i < r; ++i) buf[i * cols + j] = out[i];
    }
    for (std::size_t i = 0; i < r; ++i) {
      double* row = buf.data() + i * cols;
      std::copy_n(row, c, in.data());
      synthesis_1d(lowpass_, highpass_, in.data(), row, c);
    }
  }
}

CoefficientVector OrthoBasis::analyze(const Image& x) const {
  require_shape(x, shape_, "OrthoBasis::analyze");
  CoefficientVector out{layout_, {}};
  switch (kind_) {
    case BasisKind::canonical: out.values = x.values(); break;
    case BasisKind::wavelet:
      out.values = x.values();
      wavelet_forward(out.values);
      break;
    case BasisKind::dft: {
      RealFft2d fft(shape_);
      std::vector<std::complex<double>> spec(fft.spectrum_size());
      fft.forward(x.data(), spec);
      const double scale = 1.0 / std::sqrt(static_cast<double>(shape_.size()));
      out.values.resize(2 * spec.size());
      for (std::size_t u = 0; u < spec.size(); ++u) {
        out.values[2 * u] = spec[u].real() * scale;
        out.values[2 * u + 1] = spec[u].imag() * scale;
      }
      break;
    }
    case BasisKind::svd: out.values = svd_->right.multiply_transposed(x.values()); break;
    case BasisKind::file: out.values = matrix_->multiply_transposed(x.values()); break;
  }
  return out;
}

Image OrthoBasis::synthesize(const CoefficientVector& c) const {
  require_layout(c);
  switch (kind_) {
    case BasisKind::canonical: return Image(shape_, c.values);
    case BasisKind::wavelet: {
      std::vector<double> buf = c.values;
      wavelet_inverse(buf);
      return Image(shape_, std::move(buf));
    }
    case BasisKind::dft: {
      RealFft2d fft(shape_);
      const double scale = 1.0 / std::sqrt(static_cast<double>(shape_.size()));
      std::vector<std::complex<double>> spec(fft.spectrum_size());
      for (std::size_t u = 0; u < spec.size(); ++u) spec[u] = {c.values[2 * u], c.values[2 * u + 1]};
      Image out(shape_);
      fft.inverse(spec, out.data());
      for (double& v : out.data()) v *= scale;
      return out;
    }
    case BasisKind::svd: return Image(shape_, svd_->right.multiply(c.values));
    case BasisKind::file: return Image(shape_, matrix_->multiply(c.values));
  }
  throw std::logic_error("unreachable basis kind");
}

OrthoBasis make_wavelet_basis(Shape shape, int taps, int levels) { return OrthoBasis::wavelet(shape, taps, levels); }

OrthoBasis make_svd_basis(const ForwardOperator& op) {
  if (op.kind() != OperatorKind::explicit_matrix)
    throw std::invalid_argument("SVD basis requires an explicit-matrix operator");
  const auto& m = op.matrix();
  if (m.rows() > kMaxSvdDimension || m.cols() > kMaxSvdDimension)
    throw std::invalid_argument("SVD basis limited to dimension " + std::to_string(kMaxSvdDimension));
  return OrthoBasis::svd(jacobi_svd(m), op.input_shape(), op.output_shape());
}

OrthoBasis load_basis(const std::filesystem::path& path, std::optional<Shape> shape) {
  Matrix m = read_matrix(path);
  if (m.rows() != m.cols())
    throw std::invalid_argument("basis file " + path.string() + " is not square (" + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()) + ")");
  if (!shape) {
    const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(m.rows()))));
    if (side * side != m.rows())
      throw std::invalid_argument("basis file " + path.string() + ": image shape required for non-square size");
    shape = Shape{side, side};
  }
  std::size_t fixed = 0;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) s += m(i, j) * m(i, j);
    const double n = std::sqrt(s);
    if (n == 0.0) throw std::invalid_argument("basis file " + path.string() + " has a zero column");
    if (std::abs(n - 1.0) > 1e-6) {
      for (std::size_t i = 0; i < m.rows(); ++i) m(i, j) /= n;
      ++fixed;
    }
  }
  if (fixed > 0) spdlog::warn("basis {}: normalized {} columns to unit norm", path.string(), fixed);
  return OrthoBasis::from_matrix(std::move(m), *shape);
}

}  // namespace fida
