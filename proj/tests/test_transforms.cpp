#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <complex>
#include <numbers>
#include <numeric>

#include "fida/io.hpp"
#include "fida/operators.hpp"
#include "fida/svd.hpp"
#include "fida/transforms.hpp"
#include "test_support.hpp"

using namespace fida;
using test::random_image;

namespace {

// One level of the periodized analysis bank as an n x n matrix: lowpass rows
// first, then highpass, with g[m] = (-1)^m h[L-1-m].
Eigen::MatrixXd analysis_1d(std::span<const double> h, std::size_t n) {
  const std::size_t L = h.size();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < n / 2; ++k)
    for (std::size_t m = 0; m < L; ++m) {
      const double g = (m % 2 == 0 ? 1.0 : -1.0) * h[L - 1 - m];
      w(k, (2 * k + m) % n) += h[m];
      w(n / 2 + k, (2 * k + m) % n) += g;
    }
  return w;
}

// Multi-level 2-D analysis as a matrix acting on row-major vec(x).
Eigen::MatrixXd analysis_2d(std::span<const double> h, Shape s, int levels) {
  const std::size_t N = s.size();
  Eigen::MatrixXd out(N, N);
  for (std::size_t j = 0; j < N; ++j) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(s.rows, s.cols);
    x(j / s.cols, j % s.cols) = 1.0;
    std::size_t r = s.rows, c = s.cols;
    for (int l = 0; l < levels; ++l) {
      const Eigen::MatrixXd block = x.topLeftCorner(r, c);
      x.topLeftCorner(r, c) = analysis_1d(h, r) * block * analysis_1d(h, c).transpose();
      r /= 2;
      c /= 2;
    }
    for (std::size_t i = 0; i < N; ++i) out(i, j) = x(i / s.cols, i % s.cols);
  }
  return out;
}

std::vector<OrthoBasis> all_bases(Shape s) {
  std::vector<OrthoBasis> b = {
      make_wavelet_basis(s, 2, 3), make_wavelet_basis(s, 4, 2),  make_wavelet_basis(s, 6, 2),
      make_wavelet_basis(s, 8, 1), make_wavelet_basis(s, 12, 1), OrthoBasis::dft(s),
      OrthoBasis::canonical(s),
  };
  const auto op = make_explicit(test::random_matrix(s.size(), s.size(), 99), s, s);
  b.push_back(make_svd_basis(op));
  // an orthogonal "learned" basis: the svd right factor of another matrix
  b.push_back(OrthoBasis::from_matrix(jacobi_svd(test::random_matrix(s.size(), s.size(), 98)).right, s));
  return b;
}

}  // namespace

TEST_CASE("daubechies filters") {
  for (int taps : {2, 4, 6, 8, 12}) {
    const auto h = daubechies_lowpass(taps);
    REQUIRE(h.size() == static_cast<std::size_t>(taps));
    CHECK(std::abs(std::accumulate(h.begin(), h.end(), 0.0) - std::numbers::sqrt2) <= 1e-12);
    for (int m = 0; 2 * m < taps; ++m) {
      double s = 0.0;
      for (int k = 0; k + 2 * m < taps; ++k) s += h[k] * h[k + 2 * m];
      CHECK(std::abs(s - (m == 0 ? 1.0 : 0.0)) <= 1e-12);
    }
  }
  CHECK_THROWS_AS(daubechies_lowpass(10), std::invalid_argument);
}

TEST_CASE("haar approximation of a 2x2 image") {
  const Image x({2, 2}, std::vector<double>{1, 2, 3, 7});
  const auto c = make_wavelet_basis({2, 2}, 2, 1).analyze(x);
  CHECK(c.values[0] == doctest::Approx((1 + 2 + 3 + 7) / 2.0).epsilon(1e-15));
}

TEST_CASE("constant image has no detail energy") {
  const auto b = make_wavelet_basis({32, 32}, 6, 3);
  const auto c = b.analyze(Image({32, 32}, 17.0));
  double detail = 0.0, coarse = 0.0;
  for (std::size_t u = 0; u < c.values.size(); ++u)
    (c.layout->in_coarse_band(u) ? coarse : detail) += c.values[u] * c.values[u];
  CHECK(detail <= 1e-20 * coarse);
  CHECK(coarse == doctest::Approx(17.0 * 17.0 * 1024).epsilon(1e-12));
}

TEST_CASE("canonical coefficients equal pixels") {
  const Image x = random_image({5, 3}, 1);
  CHECK(OrthoBasis::canonical({5, 3}).analyze(x).values == x.values());
}

TEST_CASE("wavelet analysis matches an explicitly assembled filter-bank matrix") {
  const Shape s{8, 8};
  for (auto [taps, levels] : {std::pair{2, 3}, {4, 2}, {6, 1}, {6, 2}}) {
    const auto b = make_wavelet_basis(s, taps, levels);
    const Eigen::MatrixXd w = analysis_2d(daubechies_lowpass(taps), s, levels);
    const Image x = random_image(s, 7);
    const Eigen::VectorXd expected = w * test::to_eigen(x);
    const auto c = b.analyze(x);
    double worst = 0.0;
    for (std::size_t i = 0; i < 64; ++i) worst = std::max(worst, std::abs(c.values[i] - expected(i)));
    INFO("taps " << taps << " levels " << levels);
    CHECK(worst <= 1e-10);

    // The atom-by-atom matrix (columns = synthesized unit vectors) agrees too.
    for (std::size_t j = 0; j < 64; ++j) {
      auto e = b.zeros();
      e.values[j] = 1.0;
      const Image atom = b.synthesize(e);
      CHECK(std::abs(norm(atom) - 1.0) <= 1e-12);
      for (std::size_t i = 0; i < 64; ++i) REQUIRE(std::abs(atom[i] - w(j, i)) <= 1e-10);
    }
  }
}

TEST_CASE("wavelet subband layout") {
  const auto b = make_wavelet_basis({16, 32}, 4, 2);
  const auto& l = *b.layout();
  REQUIRE(l.subbands.size() == 7);
  CHECK(l.subbands[0].orientation == Orientation::approximation);
  CHECK(l.subbands[0].rows == 4);
  CHECK(l.subbands[0].cols == 8);
  std::size_t covered = 0;
  for (const auto& sb : l.subbands) covered += sb.rows * sb.cols;
  CHECK(covered == 16 * 32);
  CHECK_THROWS_AS(make_wavelet_basis({12, 16}, 4, 3), std::invalid_argument);
  CHECK_THROWS_AS(make_wavelet_basis({16, 16}, 7, 1), std::invalid_argument);
}

TEST_CASE("perfect reconstruction and Parseval over 100 random images per kind") {
  const Shape s{8, 8};
  for (const auto& b : all_bases(s)) {
    double worst_pr = 0.0, worst_parseval = 0.0;
    for (std::uint64_t k = 0; k < 100; ++k) {
      const Image x = random_image(s, 1000 + k, 30.0);
      const auto c = b.analyze(x);
      worst_pr = std::max(worst_pr, test::rel_diff(b.synthesize(c), x));
      worst_parseval =
          std::max(worst_parseval, std::abs(std::sqrt(coefficient_energy(c)) - norm(x)) / norm(x));
    }
    INFO(b.describe());
    CHECK(worst_pr <= 1e-10);
    CHECK(worst_parseval <= 1e-10);
  }
}

TEST_CASE("unit coefficient vectors synthesize unit-norm atoms") {
  const Shape s{8, 16};
  for (const auto& b : all_bases(s)) {
    const auto& l = *b.layout();
    for (std::size_t u = 0; u < l.units; ++u) {
      auto e = b.zeros();
      e.values[u * l.unit_width] = 1.0;
      // dft units that stand for a conjugate pair carry the energy of both; in the
      // self-conjugate columns rows r and R-r are stored twice, so a lone real
      // entry there only carries half an atom.
      double expected = std::sqrt(l.multiplicity(u));
      if (l.kind == BasisKind::dft) {
        const std::size_t half = s.cols / 2 + 1, r = u / half, c = u % half;
        const bool self_col = c == 0 || (s.cols % 2 == 0 && c == s.cols / 2);
        const bool self_row = r == 0 || (s.rows % 2 == 0 && r == s.rows / 2);
        if (self_col && !self_row) expected = std::sqrt(0.5);
      }
      REQUIRE(std::abs(norm(b.synthesize(e)) - expected) <= 1e-12);
    }
  }
}

TEST_CASE("dft analysis matches a direct unitary DFT") {
  const Shape s{4, 6};
  const Image x = random_image(s, 3);
  const auto c = OrthoBasis::dft(s).analyze(x);
  REQUIRE(c.layout->units == 4 * 4);
  REQUIRE(c.layout->unit_width == 2);
  const double pi = std::numbers::pi;
  for (std::size_t k = 0; k < 4; ++k)
    for (std::size_t l = 0; l < 4; ++l) {
      std::complex<double> acc = 0.0;
      for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t q = 0; q < 6; ++q)
          acc += x(r, q) * std::polar(1.0, -2 * pi * (static_cast<double>(k * r) / 4 + static_cast<double>(l * q) / 6));
      acc /= std::sqrt(24.0);
      const std::size_t u = k * 4 + l;
      CHECK(std::abs(c.values[2 * u] - acc.real()) <= 1e-12);
      CHECK(std::abs(c.values[2 * u + 1] - acc.imag()) <= 1e-12);
    }
}

TEST_CASE("dft hermitian symmetry") {
  const Shape s{6, 8};
  const auto b = OrthoBasis::dft(s);
  const std::size_t hc = s.cols / 2 + 1;
  SUBCASE("self-conjugate columns of a real image's spectrum") {
    const auto c = b.analyze(random_image(s, 4));
    for (std::size_t col : {std::size_t{0}, s.cols / 2})
      for (std::size_t r = 0; r < s.rows; ++r) {
        const std::size_t u = r * hc + col, v = ((s.rows - r) % s.rows) * hc + col;
        CHECK(std::abs(c.values[2 * u] - c.values[2 * v]) <= 1e-12);
        CHECK(std::abs(c.values[2 * u + 1] + c.values[2 * v + 1]) <= 1e-12);
      }
  }
  SUBCASE("any hermitian half spectrum synthesizes to a real image that analyzes back") {
    GaussianStream g(RngSeed{5});
    auto c = b.zeros();
    for (double& v : c.values) v = g.next();
    for (std::size_t col : {std::size_t{0}, s.cols / 2})
      for (std::size_t r = 0; r < s.rows; ++r) {
        const std::size_t u = r * hc + col, v = ((s.rows - r) % s.rows) * hc + col;
        if (v < u) continue;
        if (u == v) {
          c.values[2 * u + 1] = 0.0;
        } else {
          c.values[2 * v] = c.values[2 * u];
          c.values[2 * v + 1] = -c.values[2 * u + 1];
        }
      }
    const auto back = b.analyze(b.synthesize(c));
    double worst = 0.0;
    for (std::size_t i = 0; i < c.values.size(); ++i) worst = std::max(worst, std::abs(back.values[i] - c.values[i]));
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("wavelet shift property at the coarsest stride") {
  const Shape s{32, 32};
  const int levels = 3;
  const auto b = make_wavelet_basis(s, 6, levels);
  const Image x = random_image(s, 8);
  const auto shifted = b.analyze(cyclic_shift(x, 8, -16)).values;
  const auto base = b.analyze(x).values;
  for (const auto& sb : b.layout()->subbands) {
    const std::ptrdiff_t step = 1 << (levels - sb.level);  // coefficient shift in this band per 2^levels pixels
    const std::ptrdiff_t dr = step, dc = -2 * step;
    for (std::size_t r = 0; r < sb.rows; ++r)
      for (std::size_t c = 0; c < sb.cols; ++c) {
        const auto R = static_cast<std::ptrdiff_t>(sb.rows), C = static_cast<std::ptrdiff_t>(sb.cols);
        const std::size_t rr = static_cast<std::size_t>(((static_cast<std::ptrdiff_t>(r) + dr) % R + R) % R);
        const std::size_t cc = static_cast<std::size_t>(((static_cast<std::ptrdiff_t>(c) + dc) % C + C) % C);
        REQUIRE(std::abs(shifted[(sb.row0 + rr) * 32 + sb.col0 + cc] - base[(sb.row0 + r) * 32 + sb.col0 + c]) <=
                1e-10);
      }
  }
}

TEST_CASE("svd basis") {
  SUBCASE("identity") {
    const auto b = make_svd_basis(make_explicit(Matrix::identity(9), {3, 3}, {3, 3}));
    for (double sv : b.svd_factors().singular_values) CHECK(sv == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("diag(3, 0, 1)") {
    Matrix m(3, 3);
    m(0, 0) = 3;
    m(2, 2) = 1;
    const auto b = make_svd_basis(make_explicit(m, {1, 3}, {1, 3}));
    const auto& f = b.svd_factors();
    CHECK(f.singular_values == std::vector<double>{3, 1, 0});
    // columns of Psi are canonical vectors in the order e0, e2, e1 (up to sign)
    CHECK(std::abs(f.right(0, 0)) == 1.0);
    CHECK(std::abs(f.right(2, 1)) == 1.0);
    CHECK(std::abs(f.right(1, 2)) == 1.0);
  }
  SUBCASE("assumption holds column-wise and factors are orthogonal") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const std::size_t n = 4 + (seed * 7) % 29;
      const std::size_t m = seed % 3 == 0 ? n + 3 : n;
      const Matrix a = test::random_matrix(m, n, seed);
      const auto f = jacobi_svd(a);
      const Eigen::MatrixXd A = test::to_eigen(a), U = test::to_eigen(f.left), V = test::to_eigen(f.right);
      Eigen::VectorXd d(n);
      for (std::size_t i = 0; i < n; ++i) d(i) = f.singular_values[i];
      const double scale = A.norm();
      CHECK((A.transpose() * U - V * d.asDiagonal()).cwiseAbs().maxCoeff() <= 1e-8 * scale);
      CHECK((A - U * d.asDiagonal() * V.transpose()).norm() <= 1e-8 * scale);
      CHECK((V.transpose() * V - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-8);
      CHECK((U.transpose() * U - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-8);
      CHECK(std::is_sorted(f.singular_values.rbegin(), f.singular_values.rend()));
      Eigen::JacobiSVD<Eigen::MatrixXd> oracle(A);
      for (std::size_t i = 0; i < n; ++i)
        CHECK(std::abs(f.singular_values[i] - oracle.singularValues()(i)) <= 1e-10 * scale);
    }
  }
  SUBCASE("rank deficient and wide matrices") {
    Matrix a = test::random_matrix(6, 6, 3);
    for (std::size_t c = 0; c < 6; ++c) a(5, c) = a(4, c);  // duplicate row
    a = a.transposed();
    const auto f = jacobi_svd(a);
    CHECK(f.singular_values.back() == 0.0);
    const Eigen::MatrixXd U = test::to_eigen(f.left);
    CHECK((U.transpose() * U - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() <= 1e-8);

    const Matrix wide = test::random_matrix(3, 5, 4);
    const auto g = jacobi_svd(wide);
    CHECK(g.singular_values[3] == 0.0);
    CHECK(g.singular_values[4] == 0.0);
    const Eigen::MatrixXd W = test::to_eigen(wide), Uw = test::to_eigen(g.left), Vw = test::to_eigen(g.right);
    Eigen::VectorXd d(5);
    for (std::size_t i = 0; i < 5; ++i) d(i) = g.singular_values[i];
    CHECK((W - Uw * d.asDiagonal() * Vw.transpose()).norm() <= 1e-10 * W.norm());
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(make_svd_basis(make_gaussian_blur({8, 8}, 1.0, 1)), std::invalid_argument);
    CHECK_THROWS_AS(make_svd_basis(make_explicit(Matrix(4097, 1), {1, 1}, {4097, 1})), std::invalid_argument);
  }
}

TEST_CASE("file-loaded bases") {
  test::TempDir dir;
  SUBCASE("identity behaves like the canonical basis") {
    write_matrix(Matrix::identity(16), dir / "id.fidm");
    const auto b = load_basis(dir / "id.fidm");
    CHECK(b.kind() == BasisKind::file);
    CHECK(b.shape() == Shape{4, 4});
    const Image x = random_image({4, 4}, 1);
    CHECK(b.analyze(x).values == x.values());
  }
  SUBCASE("stored haar matrix matches the haar wavelet basis") {
    const Shape s{4, 4};
    const Eigen::MatrixXd w = analysis_2d(daubechies_lowpass(2), s, 2);
    Matrix psi(16, 16);  // columns are atoms: Psi = W^T
    for (std::size_t i = 0; i < 16; ++i)
      for (std::size_t j = 0; j < 16; ++j) psi(i, j) = w(j, i);
    write_matrix(psi, dir / "haar.fidm");
    const auto file = load_basis(dir / "haar.fidm", s);
    const auto wav = make_wavelet_basis(s, 2, 2);
    for (std::uint64_t k = 0; k < 10; ++k) {
      const Image x = random_image(s, 50 + k);
      const auto a = file.analyze(x).values, b = wav.analyze(x).values;
      for (std::size_t i = 0; i < 16; ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-10);
    }
  }
  SUBCASE("permutation matrix permutes pixels") {
    const std::vector<std::size_t> perm = {3, 0, 5, 1, 2, 4};
    Matrix p(6, 6);
    for (std::size_t j = 0; j < 6; ++j) p(perm[j], j) = 1.0;
    write_matrix(p, dir / "perm.fidm");
    const auto b = load_basis(dir / "perm.fidm", Shape{2, 3});
    const Image x = random_image({2, 3}, 2);
    const auto c = b.analyze(x);
    for (std::size_t j = 0; j < 6; ++j) CHECK(c.values[j] == x[perm[j]]);
  }
  SUBCASE("non-normalized columns are normalized") {
    Matrix m = Matrix::identity(4);
    m(1, 1) = 3.0;
    write_matrix(m, dir / "scaled.fidm");
    const auto b = load_basis(dir / "scaled.fidm");
    CHECK(b.basis_matrix()(1, 1) == 1.0);
  }
  SUBCASE("errors") {
    write_matrix(Matrix(4, 3, 1.0), dir / "rect.fidm");
    CHECK_THROWS_AS(load_basis(dir / "rect.fidm"), std::invalid_argument);
    write_matrix(Matrix::identity(6), dir / "six.fidm");
    CHECK_THROWS_AS(load_basis(dir / "six.fidm"), std::invalid_argument);
    CHECK_NOTHROW(load_basis(dir / "six.fidm", Shape{2, 3}));
    CHECK_THROWS_AS(load_basis(dir / "six.fidm", Shape{2, 2}), std::invalid_argument);
  }
}

TEST_CASE("layout mismatch is rejected") {
  const auto a = make_wavelet_basis({8, 8}, 2, 1);
  const auto b = OrthoBasis::dft({8, 8});
  CHECK_THROWS_AS(a.synthesize(b.zeros()), std::invalid_argument);
  CHECK_THROWS_AS(a.analyze(Image({4, 4})), std::invalid_argument);
}
