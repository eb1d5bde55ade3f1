#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fida/denoisers.hpp"
#include "fida/image.hpp"
#include "fida/operators.hpp"
#include "fida/spectrum.hpp"
#include "fida/transforms.hpp"

namespace fida {

enum class Method { ida, fida };

/// Starting point x^0. `automatic` uses A^T y for convolutions and explicit
/// matrices and y itself for gain operators.
enum class InitKind { automatic, zeros, observation, adjoint_observation, custom };

struct SolverConfig {
  Method method = Method::ida;
  /// Step size; empty selects the default (IDA: 1/||A||^2, FIDA: 1/L of the
  /// filtered objective).
  std::optional<double> gamma;
  /// Threshold handed to the denoiser each iteration. For a fixed global
  /// regularization weight lambda this is gamma * lambda.
  double lambda_gamma = 0.0;
  std::size_t max_iters = 100;
  /// Stop once ||x^{k+1} - x^k|| <= rel_tol * ||x^k||; 0 disables.
  double rel_tol = 1e-5;
  bool track_best = true;
  InitKind init = InitKind::automatic;
  std::optional<Image> custom_init;
};

struct SolveTrace {
  /// PSNR of x^1..x^K against the ground truth (empty without one).
  std::vector<double> iterates_psnr;
  /// ||A x^k - y|| for x^1..x^K.
  std::vector<double> objective_residual;
  Image final;
  /// Iterate with the highest PSNR (equals `final` without ground truth or
  /// when tracking is off).
  Image best;
  std::size_t best_iteration = 0;  // 1-based
  std::size_t iterations_run = 0;
  double gamma = 0.0;
  bool converged = false;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(std::size_t iteration, const std::string& what)
      : std::runtime_error("iteration " + std::to_string(iteration) + ": " + what), iteration_(iteration) {}
  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t iteration_;
};

/// x~ = x - gamma A^T (A x - y);  x = denoise(x~, lambda_gamma)
SolveTrace ida_solve(const Image& y, const ForwardOperator& op, const Denoiser& d, const SolverConfig& cfg,
                     const std::optional<Image>& truth = std::nullopt);

/// x~ = x - gamma Psi W Psi^T A^T (A x - y);  x = denoise(x~, lambda_gamma)
SolveTrace fida_solve(const Image& y, const ForwardOperator& op, const OrthoBasis& basis, const Spectrum& spec,
                      const Denoiser& d, const SolverConfig& cfg, const std::optional<Image>& truth = std::nullopt);

/// Default FIDA step: 1 / max_j (w_j delta_j^2), which is 1 / max delta for
/// the pseudo-inverse filter.
double fida_default_gamma(const Spectrum& spec);
double ida_default_gamma(const ForwardOperator& op);

/// One-shot wavelet-vaguelette style estimate: theta_i = delta_i^-1 phi_i^T y
/// soft-thresholded at lambda / delta_i, then x = Psi theta. phi comes from
/// the stored SVD factors, or implicitly as A psi_i / delta_i for the
/// canonical basis with a gain operator, the dft basis with a convolution,
/// or a wavelet basis. Zero deltas give zero coefficients.
Image wvd_estimate(const Image& y, const ForwardOperator& op, const OrthoBasis& basis, const Spectrum& spec,
                   double lambda, bool include_coarse = false);

}  // namespace fida
