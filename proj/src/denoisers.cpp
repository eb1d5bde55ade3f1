#include "fida/denoisers.hpp"

#include <cmath>
#include <stdexcept>

namespace fida {

void threshold_coefficients(CoefficientVector& c, double lambda, ThresholdRule rule, bool include_coarse) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("threshold must be nonnegative");
  const auto& layout = *c.layout;
  const bool skip_coarse = !include_coarse && layout.kind == BasisKind::wavelet;
  if (layout.unit_width == 1) {
    for (std::size_t u = 0; u < layout.units; ++u) {
      if (skip_coarse && layout.in_coarse_band(u)) continue;
      double& v = c.values[u];
      v = rule == ThresholdRule::soft ? soft_threshold(v, lambda) : hard_threshold(v, lambda);
    }
    return;
  }
  for (std::size_t u = 0; u < layout.units; ++u) {
    double& re = c.values[2 * u];
    double& im = c.values[2 * u + 1];
    const double mag = std::hypot(re, im);
    double scale = 0.0;
    if (rule == ThresholdRule::soft)
      scale = mag > lambda ? (mag - lambda) / mag : 0.0;
    else
      scale = mag > lambda ? 1.0 : 0.0;
    re *= scale;
    im *= scale;
  }
}

Denoiser Denoiser::soft(OrthoBasis basis, bool include_coarse) {
  Denoiser d;
  d.kind_ = DenoiserKind::transform_soft;
  d.basis_ = std::make_shared<const OrthoBasis>(std::move(basis));
  d.include_coarse_ = include_coarse;
  return d;
}

Denoiser Denoiser::hard(OrthoBasis basis, bool include_coarse) {
  Denoiser d = soft(std::move(basis), include_coarse);
  d.kind_ = DenoiserKind::transform_hard;
  return d;
}

Denoiser Denoiser::external(ExternalDenoiser bridge) {
  Denoiser d;
  d.kind_ = DenoiserKind::external;
  d.bridge_ = std::make_shared<const ExternalDenoiser>(std::move(bridge));
  return d;
}

const OrthoBasis& Denoiser::basis() const {
  if (!basis_) throw std::logic_error("external denoiser has no basis");
  return *basis_;
}

Image Denoiser::denoise(const Image& x, double lambda_gamma) const {
  if (!(lambda_gamma >= 0.0)) throw std::invalid_argument("denoise: lambda_gamma must be nonnegative");
  if (kind_ == DenoiserKind::external) return bridge_->run(x, lambda_gamma);
  require_shape(x, basis_->shape(), "denoise");
  if (lambda_gamma == 0.0) return x;
  CoefficientVector c = basis_->analyze(x);
  threshold_coefficients(c, lambda_gamma, kind_ == DenoiserKind::transform_soft ? ThresholdRule::soft : ThresholdRule::hard,
                         include_coarse_);
  return basis_->synthesize(c);
}

std::string Denoiser::describe() const {
  switch (kind_) {
    case DenoiserKind::transform_soft:
      return "soft-threshold(" + basis_->describe() + (include_coarse_ ? ", coarse band included" : "") + ")";
    case DenoiserKind::transform_hard:
      return "hard-threshold(" + basis_->describe() + (include_coarse_ ? ", coarse band included" : "") + ")";
    case DenoiserKind::external: {
      std::string cmd;
      for (const auto& a : bridge_->argv()) cmd += (cmd.empty() ? "" : " ") + a;
      return "external(" + cmd + ")";
    }
  }
  return "unknown";
}

Image oracle_denoise(const Image& y, const Image& x_true, const Image& deltas) {
  require_same_shape(y, x_true, "oracle_denoise");
  require_same_shape(y, deltas, "oracle_denoise");
  Image out(y.shape());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = deltas[i];
    if (d < 0.0) throw std::invalid_argument("oracle_denoise: deltas must be nonnegative");
    // x^2 > delta^-2  <=>  (delta x)^2 > 1
    const double snr = d * d * x_true[i] * x_true[i];
    out[i] = (d > 0.0 && snr > 1.0) ? y[i] : 0.0;
  }
  return out;
}

}  // namespace fida
