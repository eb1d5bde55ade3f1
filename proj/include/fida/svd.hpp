#pragma once

#include <vector>

#include "fida/matrix.hpp"

namespace fida {

/// A = left * diag(singular_values) * right^T with `right` n x n orthogonal
/// and `left` m x n. Singular values are nonnegative and descending. When
/// m >= n the columns of `left` are orthonormal (columns belonging to zero
/// singular values are completed to an orthonormal set); when m < n the
/// surplus columns are zero.
struct SvdFactors {
  Matrix left;
  std::vector<double> singular_values;
  Matrix right;
};

/// One-sided (Hestenes) Jacobi SVD. Accurate to working precision for the
/// small dense matrices it is meant for.
SvdFactors jacobi_svd(const Matrix& a, int max_sweeps = 80);

}  // namespace fida
