#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fida/image.hpp"
#include "fida/operators.hpp"
#include "fida/transforms.hpp"

namespace fida {

/// How the per-atom attenuations delta_j = ||A psi_j|| are obtained.
///   exact       one operator application per atom
///   per_subband one representative atom per wavelet subband (shift-invariant A)
///   frequency   |DFT of the wrapped kernel| (circular convolution + dft basis)
/// An svd basis always reports its stored singular values.
enum class DeltaStrategy { exact, per_subband, frequency };

std::string to_string(DeltaStrategy s);

/// Diagonal reweighting applied in the Psi domain.
///   pseudo_inverse  1/delta above the zero threshold, else 0
///   wiener          delta / (delta^2 + tau)
///   mask            1 above the zero threshold, else 0
struct FilterMode {
  enum class Kind { pseudo_inverse, wiener, mask };
  Kind kind = Kind::pseudo_inverse;
  double tau = 0.0;

  static FilterMode pseudo_inverse() { return {}; }
  static FilterMode wiener(double tau) { return {Kind::wiener, tau}; }
  static FilterMode mask() { return {Kind::mask, 0.0}; }
};

std::string to_string(const FilterMode& m);

inline constexpr double kDefaultZeroTol = 1e-12;

/// The diagonal Delta (one delta per coefficient unit) plus the weights of the
/// active filter mode. Immutable once built.
class Spectrum {
 public:
  Spectrum(std::vector<double> deltas, std::shared_ptr<const CoefficientLayout> layout, std::uint64_t basis_id,
           double zero_tol = kDefaultZeroTol, FilterMode mode = FilterMode::pseudo_inverse());

  const std::vector<double>& deltas() const { return deltas_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::shared_ptr<const CoefficientLayout>& layout() const { return layout_; }
  std::uint64_t basis_id() const { return basis_id_; }
  double zero_tol() const { return zero_tol_; }
  const FilterMode& mode() const { return mode_; }

  double max_delta() const { return max_delta_; }
  /// Deltas at or below this value count as zero.
  double threshold() const { return zero_tol_ * max_delta_; }
  bool is_zero(std::size_t unit) const { return !(deltas_[unit] > threshold()); }
  /// True when every weight is 1 to within a few ulps; apply_filter then
  /// returns its input unchanged.
  bool is_identity() const { return identity_; }

 private:
  std::vector<double> deltas_;
  std::vector<double> weights_;
  std::shared_ptr<const CoefficientLayout> layout_;
  std::uint64_t basis_id_ = 0;
  double zero_tol_ = kDefaultZeroTol;
  FilterMode mode_;
  double max_delta_ = 0.0;
  bool identity_ = false;
};

struct DeltaOptions {
  double zero_tol = kDefaultZeroTol;
  /// Allow the exact strategy above kMaxExactPixels.
  bool force = false;
};

inline constexpr std::size_t kMaxExactPixels = 256 * 256;

Spectrum compute_deltas(const ForwardOperator& op, const OrthoBasis& basis, DeltaStrategy strategy,
                        const DeltaOptions& options = {});

/// Same deltas, new weights. Wiener requires tau > 0.
Spectrum reweight(const Spectrum& spec, FilterMode mode);

/// Psi W Psi^T r.
Image apply_filter(const Spectrum& spec, const OrthoBasis& basis, const Image& r);

/// Psi W Psi^T A^T (A x - y).
Image filtered_gradient(const Image& x, const Image& y, const ForwardOperator& op, const OrthoBasis& basis,
                        const Spectrum& spec);

/// Same as filtered_gradient with A x already evaluated.
Image filtered_gradient_from_forward(const Image& ax, const Image& y, const ForwardOperator& op,
                                     const OrthoBasis& basis, const Spectrum& spec);

/// Psi Delta Psi^T x - Psi D Phi^T y from the stored SVD factors, where D
/// masks out zero singular values (the corresponding Delta^{-1/2} is 0).
Image exact_gradient_svd(const Image& x, const Image& y, const OrthoBasis& basis);

/// Cache file for (operator, basis, strategy) inside `dir`. The deltas are a
/// 1 x units FIDB file; a ".txt" sidecar records the key fields.
std::filesystem::path spectrum_cache_path(const std::filesystem::path& dir, const ForwardOperator& op,
                                          const OrthoBasis& basis, DeltaStrategy strategy);
void write_spectrum(const Spectrum& spec, const std::filesystem::path& path, const ForwardOperator& op,
                    const OrthoBasis& basis, DeltaStrategy strategy);
Spectrum read_spectrum(const std::filesystem::path& path, const OrthoBasis& basis, double zero_tol = kDefaultZeroTol);

/// compute_deltas with an optional on-disk cache. A cache hit skips the
/// computation; a miss computes and stores.
Spectrum compute_deltas_cached(const ForwardOperator& op, const OrthoBasis& basis, DeltaStrategy strategy,
                               const std::optional<std::filesystem::path>& cache_dir, const DeltaOptions& options = {});

}  // namespace fida
