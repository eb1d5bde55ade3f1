#include "fida/solvers.hpp"

#include <cmath>
#include <functional>

#include "fida/norm_estimate.hpp"

namespace fida {

namespace {

Image initial_iterate(const Image& y, const ForwardOperator& op, const SolverConfig& cfg) {
  switch (cfg.init) {
    case InitKind::zeros: return Image(op.input_shape());
    case InitKind::observation:
      if (op.input_shape() != op.output_shape())
        throw std::invalid_argument("observation init needs matching input and output shapes");
      return y;
    case InitKind::adjoint_observation: return op.adjoint(y);
    case InitKind::custom:
      if (!cfg.custom_init) throw std::invalid_argument("custom init selected without an image");
      require_shape(*cfg.custom_init, op.input_shape(), "custom init");
      return *cfg.custom_init;
    case InitKind::automatic:
      return op.kind() == OperatorKind::diagonal_gain ? y : op.adjoint(y);
  }
  throw std::logic_error("unreachable init kind");
}

using GradientFn = std::function<Image(const Image& ax)>;

// Shared gradient-then-denoise loop. `gradient` receives A x^k.
SolveTrace run_loop(const Image& y, const ForwardOperator& op, const Denoiser& d, const SolverConfig& cfg,
                    const std::optional<Image>& truth, double gamma, const GradientFn& gradient) {
  if (cfg.max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
  if (!(cfg.lambda_gamma >= 0.0)) throw std::invalid_argument("lambda_gamma must be nonnegative");
  if (!(cfg.rel_tol >= 0.0)) throw std::invalid_argument("rel_tol must be nonnegative");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("step size must be positive and finite");
  require_shape(y, op.output_shape(), "solver observation");
  if (truth) require_shape(*truth, op.input_shape(), "solver ground truth");

  SolveTrace trace;
  trace.gamma = gamma;
  Image x = initial_iterate(y, op, cfg);
  Image ax = op.apply(x);
  double best_psnr = -std::numeric_limits<double>::infinity();

  for (std::size_t k = 0; k < cfg.max_iters; ++k) {
    Image next;
    try {
      const Image g = gradient(ax);
      next = d.denoise(subtract_scaled(x, gamma, g), cfg.lambda_gamma);
    } catch (const SolverError&) {
      throw;
    } catch (const std::exception& e) {
      throw SolverError(k + 1, e.what());
    }
    const double change = distance(next, x);
    const double scale = norm(x);
    Image a_next = op.apply(next);
    trace.objective_residual.push_back(distance(a_next, y));
    if (truth) {
      const double p = psnr(*truth, next);
      trace.iterates_psnr.push_back(p);
      if (cfg.track_best && (p > best_psnr || trace.best.empty())) {
        best_psnr = p;
        trace.best = next;
        trace.best_iteration = k + 1;
      }
    }
    x = std::move(next);
    ax = std::move(a_next);
    trace.iterations_run = k + 1;
    if (cfg.rel_tol > 0.0 && change <= cfg.rel_tol * scale) {
      trace.converged = true;
      break;
    }
  }
  if (trace.best.empty()) {
    trace.best = x;
    trace.best_iteration = trace.iterations_run;
  }
  trace.final = std::move(x);
  return trace;
}

}  // namespace

double ida_default_gamma(const ForwardOperator& op) {
  const double l = operator_norm_sq(op);
  if (!(l > 0.0)) throw std::invalid_argument("cannot pick a step size for a zero operator");
  return 1.0 / l;
}

double fida_default_gamma(const Spectrum& spec) {
  double l = 0.0;
  const auto& d = spec.deltas();
  const auto& w = spec.weights();
  for (std::size_t u = 0; u < d.size(); ++u) l = std::max(l, w[u] * d[u] * d[u]);
  if (!(l > 0.0)) throw std::invalid_argument("cannot pick a step size: filtered operator is zero");
  return 1.0 / l;
}

SolveTrace ida_solve(const Image& y, const ForwardOperator& op, const Denoiser& d, const SolverConfig& cfg,
                     const std::optional<Image>& truth) {
  const double gamma = cfg.gamma ? *cfg.gamma : ida_default_gamma(op);
  return run_loop(y, op, d, cfg, truth, gamma, [&](const Image& ax) { return op.adjoint(ax - y); });
}

SolveTrace fida_solve(const Image& y, const ForwardOperator& op, const OrthoBasis& basis, const Spectrum& spec,
                      const Denoiser& d, const SolverConfig& cfg, const std::optional<Image>& truth) {
  if (spec.basis_id() != basis.id()) throw std::invalid_argument("fida_solve: spectrum belongs to a different basis");
  if (basis.shape() != op.input_shape()) throw std::invalid_argument("fida_solve: basis shape does not match operator");
  const double gamma = cfg.gamma ? *cfg.gamma : fida_default_gamma(spec);
  return run_loop(y, op, d, cfg, truth, gamma,
                  [&](const Image& ax) { return filtered_gradient_from_forward(ax, y, op, basis, spec); });
}

Image wvd_estimate(const Image& y, const ForwardOperator& op, const OrthoBasis& basis, const Spectrum& spec,
                   double lambda, bool include_coarse) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("wvd_estimate: lambda must be nonnegative");
  if (spec.basis_id() != basis.id()) throw std::invalid_argument("wvd_estimate: spectrum belongs to a different basis");
  require_shape(y, op.output_shape(), "wvd_estimate");
  const auto& delta = spec.deltas();

  if (basis.kind() == BasisKind::svd) {
    const auto& f = basis.svd_factors();
    const std::vector<double> z = f.left.multiply_transposed(y.values());
    std::vector<double> theta(z.size(), 0.0);
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (spec.is_zero(i)) continue;
      theta[i] = soft_threshold(z[i] / delta[i], lambda / delta[i]);
    }
    return Image(basis.shape(), f.right.multiply(theta));
  }

  const bool supported = (basis.kind() == BasisKind::canonical && op.kind() == OperatorKind::diagonal_gain) ||
                         (basis.kind() == BasisKind::dft && op.kind() == OperatorKind::circular_convolution) ||
                         basis.kind() == BasisKind::wavelet;
  if (!supported)
    throw std::invalid_argument("wvd_estimate: unsupported basis " + basis.describe() + " for " + op.describe());

  // delta_i^-1 phi_i^T y with phi_i = A psi_i / delta_i is psi_i^T A^T y / delta_i^2.
  CoefficientVector c = basis.analyze(op.adjoint(y));
  const auto& layout = *c.layout;
  const bool skip_coarse = !include_coarse && layout.kind == BasisKind::wavelet;
  for (std::size_t u = 0; u < layout.units; ++u) {
    if (spec.is_zero(u)) {
      for (std::size_t k = 0; k < layout.unit_width; ++k) c.values[u * layout.unit_width + k] = 0.0;
      continue;
    }
    const double inv_sq = 1.0 / (delta[u] * delta[u]);
    const double t = (skip_coarse && layout.in_coarse_band(u)) ? 0.0 : lambda / delta[u];
    if (layout.unit_width == 1) {
      c.values[u] = soft_threshold(c.values[u] * inv_sq, t);
    } else {
      double& re = c.values[2 * u];
      double& im = c.values[2 * u + 1];
      re *= inv_sq;
      im *= inv_sq;
      const double mag = std::hypot(re, im);
      const double s = mag > t ? (mag - t) / mag : 0.0;
      re *= s;
      im *= s;
    }
  }
  return basis.synthesize(c);
}

}  // namespace fida
