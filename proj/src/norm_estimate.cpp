#include "fida/norm_estimate.hpp"

#include <algorithm>

namespace fida {

double operator_norm_sq(const ForwardOperator& op, std::size_t iters, RngSeed seed) {
  if (op.kind() == OperatorKind::diagonal_gain) {
    double m = 0.0;
    for (double g : op.gains().data()) m = std::max(m, g * g);
    return m;
  }

  Image v(op.input_shape());
  GaussianStream g(seed);
  for (double& e : v.data()) e = g.next();
  double n = norm(v);
  for (double& e : v.data()) e /= n;

  Image av = op.apply(v);
  double estimate = dot(av, av);
  for (std::size_t k = 0; k < iters; ++k) {
    Image w = op.adjoint(av);
    n = norm(w);
    if (n == 0.0) return 0.0;
    for (double& e : w.data()) e /= n;
    v = std::move(w);
    av = op.apply(v);
    // ||v|| = 1 up to rounding; dividing keeps the quotient exact.
    estimate = std::max(estimate, dot(av, av) / dot(v, v));
  }
  return estimate;
}

}  // namespace fida
