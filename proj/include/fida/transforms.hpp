#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fida/image.hpp"
#include "fida/matrix.hpp"
#include "fida/operators.hpp"
#include "fida/svd.hpp"

namespace fida {

enum class BasisKind { wavelet, dft, canonical, svd, file };

std::string to_string(BasisKind kind);

enum class Orientation { approximation, lh, hl, hh };

/// One rectangular band of a 2-D Mallat wavelet layout. Level 1 is the finest.
/// `lh` is lowpass down the rows and highpass across the columns.
struct Subband {
  int level = 0;
  Orientation orientation = Orientation::approximation;
  std::size_t row0 = 0, col0 = 0, rows = 0, cols = 0;

  bool contains(std::size_t r, std::size_t c) const {
    return r >= row0 && r < row0 + rows && c >= col0 && c < col0 + cols;
  }
  friend bool operator==(const Subband&, const Subband&) = default;
};

/// Describes how a coefficient array is organized.
///
/// A coefficient "unit" is one real value, or for the DFT basis one complex
/// value stored as an interleaved (re, im) pair. The DFT basis keeps the
/// non-redundant half spectrum rows x (cols/2 + 1); entries in the first and
/// (for even widths) last column stand for themselves, every other entry also
/// stands for its conjugate partner, which `multiplicity` reports.
struct CoefficientLayout {
  BasisKind kind = BasisKind::canonical;
  Shape shape{};
  std::size_t units = 0;
  std::size_t unit_width = 1;
  std::vector<Subband> subbands;  // wavelet kind only; [0] is the coarse approximation band

  std::size_t value_count() const { return units * unit_width; }
  double multiplicity(std::size_t unit) const;
  /// True when the unit lies in the coarsest approximation band (wavelet kind).
  bool in_coarse_band(std::size_t unit) const;
  /// Index into `subbands` of the band holding `unit` (wavelet kind).
  std::size_t subband_of(std::size_t unit) const;

  friend bool operator==(const CoefficientLayout&, const CoefficientLayout&) = default;
};

struct CoefficientVector {
  std::shared_ptr<const CoefficientLayout> layout;
  std::vector<double> values;
};

/// Weighted squared norm sum_u multiplicity(u) * |c_u|^2; equals ||x||^2 for
/// orthonormal bases (Parseval).
double coefficient_energy(const CoefficientVector& c);

/// Orthonormal wavelet lowpass filter for a Daubechies family given by tap
/// count: 2 (Haar), 4, 6, 8 or 12.
std::span<const double> daubechies_lowpass(int taps);

/// The sparsifying basis Psi. analyze computes Psi^T x, synthesize Psi c.
class OrthoBasis {
 public:
  static OrthoBasis wavelet(Shape shape, int taps, int levels);
  static OrthoBasis dft(Shape shape);
  static OrthoBasis canonical(Shape shape);
  static OrthoBasis svd(SvdFactors factors, Shape input_shape, Shape output_shape);
  static OrthoBasis from_matrix(Matrix columns, Shape shape);

  BasisKind kind() const { return kind_; }
  Shape shape() const { return shape_; }
  const std::shared_ptr<const CoefficientLayout>& layout() const { return layout_; }

  CoefficientVector analyze(const Image& x) const;
  Image synthesize(const CoefficientVector& c) const;
  CoefficientVector zeros() const;

  int taps() const { return static_cast<int>(lowpass_.size()); }
  int levels() const { return levels_; }
  /// SVD factors (svd kind only).
  const SvdFactors& svd_factors() const;
  Shape svd_output_shape() const { return svd_output_shape_; }
  /// Basis columns (file kind only).
  const Matrix& basis_matrix() const;

  std::uint64_t id() const { return id_; }
  std::string describe() const;

 private:
  OrthoBasis() = default;
  void require_layout(const CoefficientVector& c) const;

  void wavelet_forward(std::vector<double>& buf) const;
  void wavelet_inverse(std::vector<double>& buf) const;

  BasisKind kind_ = BasisKind::canonical;
  Shape shape_{};
  std::shared_ptr<const CoefficientLayout> layout_;
  std::vector<double> lowpass_;
  std::vector<double> highpass_;
  int levels_ = 0;
  std::shared_ptr<const SvdFactors> svd_;
  Shape svd_output_shape_{};
  std::shared_ptr<const Matrix> matrix_;
  std::uint64_t id_ = 0;
};

inline CoefficientVector analyze(const OrthoBasis& b, const Image& x) { return b.analyze(x); }
inline Image synthesize(const OrthoBasis& b, const CoefficientVector& c) { return b.synthesize(c); }

/// Periodized orthonormal 2-D wavelet basis. Requires both dimensions to be
/// divisible by 2^levels.
OrthoBasis make_wavelet_basis(Shape shape, int taps, int levels);

/// Full SVD basis of an explicit operator (A = Phi Delta Psi^T); the basis is
/// Psi, with Phi and the singular values kept alongside.
OrthoBasis make_svd_basis(const ForwardOperator& op);
inline constexpr std::size_t kMaxSvdDimension = 4096;

/// Loads a square FIDM matrix whose columns are the basis atoms. Columns that
/// are not unit norm within 1e-6 are normalized with a warning. When `shape`
/// is omitted the matrix size must be a perfect square.
OrthoBasis load_basis(const std::filesystem::path& path, std::optional<Shape> shape = std::nullopt);

}  // namespace fida
