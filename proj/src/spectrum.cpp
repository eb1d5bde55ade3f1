#include "fida/spectrum.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <unistd.h>

#include "fida/io.hpp"
#include "fida/parallel.hpp"
#include "fida/rng.hpp"

namespace fida {

std::string to_string(DeltaStrategy s) {
  switch (s) {
    case DeltaStrategy::exact: return "exact";
    case DeltaStrategy::per_subband: return "per-subband";
    case DeltaStrategy::frequency: return "frequency";
  }
  return "unknown";
}

std::string to_string(const FilterMode& m) {
  switch (m.kind) {
    case FilterMode::Kind::pseudo_inverse: return "pinv";
    case FilterMode::Kind::mask: return "mask";
    case FilterMode::Kind::wiener: {
      std::ostringstream os;
      os << "wiener:tau=" << std::setprecision(17) << m.tau;
      return os.str();
    }
  }
  return "unknown";
}

Spectrum::Spectrum(std::vector<double> deltas, std::shared_ptr<const CoefficientLayout> layout, std::uint64_t basis_id,
                   double zero_tol, FilterMode mode)
    : deltas_(std::move(deltas)), layout_(std::move(layout)), basis_id_(basis_id), zero_tol_(zero_tol), mode_(mode) {
  if (!layout_ || deltas_.size() != layout_->units)
    throw std::invalid_argument("spectrum: delta count does not match coefficient layout");
  if (!(zero_tol_ >= 0.0)) throw std::invalid_argument("spectrum: zero_tol must be nonnegative");
  if (mode_.kind == FilterMode::Kind::wiener && !(mode_.tau > 0.0))
    throw std::invalid_argument("spectrum: wiener tau must be positive");
  for (double d : deltas_) {
    if (!std::isfinite(d) || d < 0.0) throw std::invalid_argument("spectrum: deltas must be finite and nonnegative");
    max_delta_ = std::max(max_delta_, d);
  }

  weights_.resize(deltas_.size());
  const double thr = threshold();
  identity_ = true;
  for (std::size_t u = 0; u < deltas_.size(); ++u) {
    const double d = deltas_[u];
    const bool live = d > thr;
    double w = 0.0;
    switch (mode_.kind) {
      case FilterMode::Kind::pseudo_inverse: w = live ? 1.0 / d : 0.0; break;
      case FilterMode::Kind::mask: w = live ? 1.0 : 0.0; break;
      case FilterMode::Kind::wiener: w = d / (d * d + mode_.tau); break;
    }
    weights_[u] = w;
    if (std::abs(w - 1.0) > 1e-14) identity_ = false;
  }
}

namespace {

// For the canonical basis ||A e_j|| is the norm of column j of A, which is
// available without synthesizing atoms.
std::optional<std::vector<double>> canonical_deltas(const ForwardOperator& op, const OrthoBasis& basis) {
  if (basis.kind() != BasisKind::canonical) return std::nullopt;
  const std::size_t n = basis.shape().size();
  std::vector<double> deltas(n);
  switch (op.kind()) {
    case OperatorKind::diagonal_gain:
      for (std::size_t j = 0; j < n; ++j) deltas[j] = std::abs(op.gains()[j]);
      return deltas;
    case OperatorKind::circular_convolution:
      std::fill(deltas.begin(), deltas.end(), norm(op.kernel()));
      return deltas;
    case OperatorKind::explicit_matrix: {
      const Matrix& m = op.matrix();
      for (std::size_t j = 0; j < n; ++j) {
        long double s = 0.0L;
        for (std::size_t i = 0; i < m.rows(); ++i) s += static_cast<long double>(m(i, j)) * m(i, j);
        deltas[j] = static_cast<double>(std::sqrt(s));
      }
      return deltas;
    }
  }
  return std::nullopt;
}

std::vector<double> exact_deltas(const ForwardOperator& op, const OrthoBasis& basis) {
  if (auto d = canonical_deltas(op, basis)) return std::move(*d);
  const auto& layout = *basis.layout();
  std::vector<double> deltas(layout.units);
  parallel_for(layout.units, [&](std::size_t u) {
    CoefficientVector c = basis.zeros();
    c.values[u * layout.unit_width] = 1.0;
    const Image atom = basis.synthesize(c);
    const double atom_norm = norm(atom);
    deltas[u] = atom_norm > 0.0 ? norm(op.apply(atom)) / atom_norm : 0.0;
  });
  return deltas;
}

std::vector<double> subband_deltas(const ForwardOperator& op, const OrthoBasis& basis) {
  const auto& layout = *basis.layout();
  std::vector<double> deltas(layout.units);
  for (const Subband& band : layout.subbands) {
    CoefficientVector c = basis.zeros();
    c.values[band.row0 * layout.shape.cols + band.col0] = 1.0;
    const Image atom = basis.synthesize(c);
    const double d = norm(op.apply(atom)) / norm(atom);
    for (std::size_t r = band.row0; r < band.row0 + band.rows; ++r)
      for (std::size_t col = band.col0; col < band.col0 + band.cols; ++col) deltas[r * layout.shape.cols + col] = d;
  }
  return deltas;
}

}  // namespace

Spectrum compute_deltas(const ForwardOperator& op, const OrthoBasis& basis, DeltaStrategy strategy,
                        const DeltaOptions& options) {
  if (op.input_shape() != basis.shape())
    throw std::invalid_argument("compute_deltas: operator input " + to_string(op.input_shape()) +
                                " does not match basis " + basis.describe());
  std::vector<double> deltas;
  if (basis.kind() == BasisKind::svd) {
    if (op.kind() != OperatorKind::explicit_matrix || op.output_shape() != basis.svd_output_shape())
      throw std::invalid_argument("compute_deltas: svd basis does not belong to this operator");
    deltas = basis.svd_factors().singular_values;
    return Spectrum(std::move(deltas), basis.layout(), basis.id(), options.zero_tol);
  }

  switch (strategy) {
    case DeltaStrategy::exact:
      if (basis.shape().size() > kMaxExactPixels && !options.force)
        throw std::invalid_argument("compute_deltas: exact strategy refused above 256x256 without force");
      deltas = exact_deltas(op, basis);
      break;
    case DeltaStrategy::per_subband:
      if (basis.kind() != BasisKind::wavelet || !op.is_shift_invariant())
        throw std::invalid_argument("compute_deltas: per-subband strategy needs a wavelet basis and a convolution");
      deltas = subband_deltas(op, basis);
      break;
    case DeltaStrategy::frequency: {
      if (basis.kind() != BasisKind::dft || op.kind() != OperatorKind::circular_convolution)
        throw std::invalid_argument("compute_deltas: frequency strategy needs a dft basis and a convolution");
      const auto& k = op.kernel_spectrum();
      deltas.resize(k.size());
      for (std::size_t u = 0; u < k.size(); ++u) deltas[u] = std::abs(k[u]);
      break;
    }
  }
  return Spectrum(std::move(deltas), basis.layout(), basis.id(), options.zero_tol);
}

Spectrum reweight(const Spectrum& spec, FilterMode mode) {
  if (mode.kind == FilterMode::Kind::wiener && !(mode.tau > 0.0))
    throw std::invalid_argument("reweight: wiener tau must be positive");
  return Spectrum(spec.deltas(), spec.layout(), spec.basis_id(), spec.zero_tol(), mode);
}

Image apply_filter(const Spectrum& spec, const OrthoBasis& basis, const Image& r) {
  if (spec.basis_id() != basis.id() || !(*spec.layout() == *basis.layout()))
    throw std::invalid_argument("apply_filter: spectrum was not computed for basis " + basis.describe());
  require_shape(r, basis.shape(), "apply_filter");
  if (spec.is_identity()) return r;
  CoefficientVector c = basis.analyze(r);
  const std::size_t width = c.layout->unit_width;
  const auto& w = spec.weights();
  for (std::size_t u = 0; u < w.size(); ++u)
    for (std::size_t k = 0; k < width; ++k) c.values[u * width + k] *= w[u];
  return basis.synthesize(c);
}

Image filtered_gradient_from_forward(const Image& ax, const Image& y, const ForwardOperator& op,
                                     const OrthoBasis& basis, const Spectrum& spec) {
  return apply_filter(spec, basis, op.adjoint(ax - y));
}

Image filtered_gradient(const Image& x, const Image& y, const ForwardOperator& op, const OrthoBasis& basis,
                        const Spectrum& spec) {
  return filtered_gradient_from_forward(op.apply(x), y, op, basis, spec);
}

Image exact_gradient_svd(const Image& x, const Image& y, const OrthoBasis& basis) {
  if (basis.kind() != BasisKind::svd) throw std::invalid_argument("exact_gradient_svd requires an svd basis");
  require_shape(x, basis.shape(), "exact_gradient_svd");
  require_shape(y, basis.svd_output_shape(), "exact_gradient_svd");
  const auto& f = basis.svd_factors();
  const std::vector<double> theta = f.right.multiply_transposed(x.values());
  const std::vector<double> z = f.left.multiply_transposed(y.values());
  std::vector<double> c(theta.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double d = f.singular_values[i];
    c[i] = d > 0.0 ? d * theta[i] - z[i] : 0.0;
  }
  return Image(basis.shape(), f.right.multiply(c));
}

std::filesystem::path spectrum_cache_path(const std::filesystem::path& dir, const ForwardOperator& op,
                                          const OrthoBasis& basis, DeltaStrategy strategy) {
  const std::uint64_t key = Fnv1a().u64(op.hash()).u64(basis.id()).str(to_string(strategy)).digest();
  std::ostringstream name;
  name << "spectrum-" << std::hex << std::setw(16) << std::setfill('0') << key << ".fidb";
  return dir / name.str();
}

void write_spectrum(const Spectrum& spec, const std::filesystem::path& path, const ForwardOperator& op,
                    const OrthoBasis& basis, DeltaStrategy strategy) {
  write_fidb(Image(Shape{1, spec.deltas().size()}, spec.deltas()), path);
  std::ofstream side(std::filesystem::path(path).concat(".txt"));
  side << "operator_hash=" << std::hex << std::setw(16) << std::setfill('0') << op.hash() << std::dec << "\n"
       << "operator=" << op.describe() << "\n"
       << "basis_id=" << std::hex << std::setw(16) << std::setfill('0') << basis.id() << std::dec << "\n"
       << "basis=" << basis.describe() << "\n"
       << "strategy=" << to_string(strategy) << "\n"
       << "zero_tol=" << std::setprecision(17) << spec.zero_tol() << "\n";
  if (!side) throw std::runtime_error("failed writing spectrum sidecar for " + path.string());
}

Spectrum read_spectrum(const std::filesystem::path& path, const OrthoBasis& basis, double zero_tol) {
  const Image d = read_fidb(path);
  if (d.rows() != 1 || d.cols() != basis.layout()->units)
    throw std::runtime_error(path.string() + ": spectrum length does not match basis " + basis.describe());
  return Spectrum(d.values(), basis.layout(), basis.id(), zero_tol);
}

Spectrum compute_deltas_cached(const ForwardOperator& op, const OrthoBasis& basis, DeltaStrategy strategy,
                               const std::optional<std::filesystem::path>& cache_dir, const DeltaOptions& options) {
  if (!cache_dir) return compute_deltas(op, basis, strategy, options);
  const auto path = spectrum_cache_path(*cache_dir, op, basis, strategy);
  if (std::filesystem::exists(path)) {
    spdlog::debug("spectrum cache hit {}", path.string());
    return read_spectrum(path, basis, options.zero_tol);
  }
  Spectrum spec = compute_deltas(op, basis, strategy, options);
  std::filesystem::create_directories(*cache_dir);
  // Write under a private name first so concurrent readers never see a
  // partial file.
  auto staging = path;
  staging += ".tmp" + std::to_string(::getpid()) + "." +
             std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  write_spectrum(spec, staging, op, basis, strategy);
  std::filesystem::rename(std::filesystem::path(staging).concat(".txt"), std::filesystem::path(path).concat(".txt"));
  std::filesystem::rename(staging, path);
  spdlog::info("spectrum cached at {}", path.string());
  return spec;
}

}  // namespace fida
