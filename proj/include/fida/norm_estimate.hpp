#pragma once

#include <cstddef>

#include "fida/operators.hpp"
#include "fida/rng.hpp"

namespace fida {

/// Sub-seed used when the solvers pick a step size automatically.
inline constexpr RngSeed kStepSizeSeed{0x5eed0f1da5eedULL};
inline constexpr std::size_t kDefaultPowerIterations = 200;

/// Power-iteration estimate of sigma_max(A)^2.
///
/// Starting from a seeded Gaussian vector v0, iterates v <- A^T A v and
/// returns the Rayleigh quotient ||A v_k||^2 / ||v_k||^2. For a positive
/// semidefinite A^T A this sequence is non-decreasing in k. A zero operator
/// returns 0. Diagonal gains are answered exactly as max gain^2.
double operator_norm_sq(const ForwardOperator& op, std::size_t iters = kDefaultPowerIterations,
                        RngSeed seed = kStepSizeSeed);

}  // namespace fida
