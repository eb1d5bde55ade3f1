#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fida/bridge.hpp"
#include "fida/image.hpp"
#include "fida/transforms.hpp"

namespace fida {

/// sign(v) * max(0, |v| - lambda)
inline double soft_threshold(double v, double lambda) {
  const double m = (v < 0 ? -v : v) - lambda;
  if (!(m > 0.0)) return 0.0;
  return v < 0 ? -m : m;
}

/// v if |v| > lambda else 0
inline double hard_threshold(double v, double lambda) { return (v < 0 ? -v : v) > lambda ? v : 0.0; }

enum class ThresholdRule { soft, hard };

/// Thresholds every coefficient unit in place. Complex units (dft basis)
/// shrink in magnitude and keep their phase. The coarsest wavelet
/// approximation band is left alone unless include_coarse is set.
void threshold_coefficients(CoefficientVector& c, double lambda, ThresholdRule rule, bool include_coarse);

enum class DenoiserKind { transform_soft, transform_hard, external };

/// The denoise(x, lambda_gamma) step. Transform denoisers threshold in an
/// orthonormal basis (normally a wavelet basis); the external kind hands the
/// image to a subprocess.
class Denoiser {
 public:
  static Denoiser soft(OrthoBasis basis, bool include_coarse = false);
  static Denoiser hard(OrthoBasis basis, bool include_coarse = false);
  static Denoiser external(ExternalDenoiser bridge);

  DenoiserKind kind() const { return kind_; }
  const OrthoBasis& basis() const;
  bool include_coarse() const { return include_coarse_; }

  Image denoise(const Image& x, double lambda_gamma) const;
  std::string describe() const;

 private:
  Denoiser() = default;
  DenoiserKind kind_ = DenoiserKind::transform_soft;
  std::shared_ptr<const OrthoBasis> basis_;
  bool include_coarse_ = false;
  std::shared_ptr<const ExternalDenoiser> bridge_;
};

inline Image denoise(const Denoiser& d, const Image& x, double lambda_gamma) { return d.denoise(x, lambda_gamma); }

/// Keep-or-kill oracle for a diagonal operator with unit noise variance:
/// out_i = y_i when x_i^2 > delta_i^-2 (SNR above 1), else 0. Pixels with
/// delta_i = 0 are always killed.
Image oracle_denoise(const Image& y, const Image& x_true, const Image& deltas);

}  // namespace fida
