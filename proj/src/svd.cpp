#include "fida/svd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace fida {

namespace {

// Column-major working copy so column rotations touch contiguous memory.
struct Columns {
  std::size_t rows, cols;
  std::vector<double> data;
  double* col(std::size_t j) { return data.data() + j * rows; }
  const double* col(std::size_t j) const { return data.data() + j * rows; }
};

void rotate(double* p, double* q, std::size_t n, double c, double s) {
  for (std::size_t i = 0; i < n; ++i) {
    const double a = p[i], b = q[i];
    p[i] = c * a - s * b;
    q[i] = s * a + c * b;
  }
}

double column_dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

SvdFactors jacobi_svd(const Matrix& a, int max_sweeps) {
  const std::size_t m = a.rows(), n = a.cols();
  if (m == 0 || n == 0) throw std::invalid_argument("jacobi_svd: empty matrix");

  Columns u{m, n, std::vector<double>(m * n)};
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) u.col(j)[i] = a(i, j);
  Columns v{n, n, std::vector<double>(n * n, 0.0)};
  for (std::size_t j = 0; j < n; ++j) v.col(j)[j] = 1.0;

  constexpr double eps = std::numeric_limits<double>::epsilon();
  // Columns below round-off of the whole matrix are numerically zero;
  // rotating against them never settles.
  double frob_sq = 0.0;
  for (double x : u.data) frob_sq += x * x;
  const double floor = eps * eps * frob_sq;
  bool converged = false;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    converged = true;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double alpha = column_dot(u.col(p), u.col(p), m);
        const double beta = column_dot(u.col(q), u.col(q), m);
        const double gamma = column_dot(u.col(p), u.col(q), m);
        if (alpha <= floor || beta <= floor) continue;
        if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        converged = false;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        rotate(u.col(p), u.col(q), m, c, s);
        rotate(v.col(p), v.col(q), n, c, s);
      }
  }
  if (!converged) throw std::runtime_error("jacobi_svd: no convergence");

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) sigma[j] = std::sqrt(column_dot(u.col(j), u.col(j), m));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  const double sigma_max = sigma[order[0]];
  const double tiny = static_cast<double>(std::max(m, n)) * eps * sigma_max;

  SvdFactors out{Matrix(m, n), std::vector<double>(n), Matrix(n, n)};
  std::vector<std::vector<double>> basis;  // accepted left vectors
  std::vector<std::size_t> deficient;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    for (std::size_t i = 0; i < n; ++i) out.right(i, k) = v.col(j)[i];
    if (sigma[j] > tiny && sigma_max > 0.0) {
      out.singular_values[k] = sigma[j];
      for (std::size_t i = 0; i < m; ++i) out.left(i, k) = u.col(j)[i] / sigma[j];
      basis.emplace_back(u.col(j), u.col(j) + m);
      for (double& e : basis.back()) e /= sigma[j];
    } else {
      out.singular_values[k] = 0.0;
      deficient.push_back(k);
    }
  }

  // Complete the left factor with canonical vectors orthogonalized against
  // the accepted columns (modified Gram-Schmidt, twice for stability).
  std::size_t candidate = 0;
  for (std::size_t k : deficient) {
    if (basis.size() >= m) break;  // m < n: remaining columns stay zero
    while (candidate < m) {
      std::vector<double> w(m, 0.0);
      w[candidate++] = 1.0;
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& b : basis) {
          const double d = column_dot(w.data(), b.data(), m);
          for (std::size_t i = 0; i < m; ++i) w[i] -= d * b[i];
        }
      const double nw = std::sqrt(column_dot(w.data(), w.data(), m));
      if (nw < 1e-8) continue;
      for (double& e : w) e /= nw;
      for (std::size_t i = 0; i < m; ++i) out.left(i, k) = w[i];
      basis.push_back(std::move(w));
      break;
    }
  }
  return out;
}

}  // namespace fida
