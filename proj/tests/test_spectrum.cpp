#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <complex>
#include <numbers>

#include "fida/io.hpp"
#include "fida/operators.hpp"
#include "fida/spectrum.hpp"
#include "fida/transforms.hpp"
#include "test_support.hpp"

using namespace fida;
using test::random_image;

namespace {

Spectrum from_values(const OrthoBasis& b, std::vector<double> d, FilterMode mode = FilterMode::pseudo_inverse()) {
  return Spectrum(std::move(d), b.layout(), b.id(), kDefaultZeroTol, mode);
}

// Basis matrix with the synthesized unit atoms as columns (real-unit bases).
Eigen::MatrixXd basis_columns(const OrthoBasis& b) {
  const auto& l = *b.layout();
  Eigen::MatrixXd psi(b.shape().size(), l.units);
  for (std::size_t u = 0; u < l.units; ++u) {
    auto e = b.zeros();
    e.values[u] = 1.0;
    psi.col(u) = test::to_eigen(b.synthesize(e));
  }
  return psi;
}

Eigen::MatrixXd operator_matrix(const ForwardOperator& op) {
  const Shape in = op.input_shape();
  Eigen::MatrixXd a(op.output_shape().size(), in.size());
  for (std::size_t j = 0; j < in.size(); ++j) {
    Image e(in);
    e[j] = 1.0;
    a.col(j) = test::to_eigen(op.apply(e));
  }
  return a;
}

// Full 2-D DFT, unnormalized, computed term by term.
std::vector<std::complex<double>> naive_dft(const Image& x, int sign) {
  const std::size_t R = x.rows(), C = x.cols();
  const double pi = std::numbers::pi;
  std::vector<std::complex<double>> out(R * C);
  for (std::size_t k = 0; k < R; ++k)
    for (std::size_t l = 0; l < C; ++l) {
      std::complex<double> acc = 0.0;
      for (std::size_t r = 0; r < R; ++r)
        for (std::size_t c = 0; c < C; ++c)
          acc += x(r, c) * std::polar(1.0, sign * 2.0 * pi * (double(k * r) / R + double(l * c) / C));
      out[k * C + l] = acc;
    }
  return out;
}

}  // namespace

TEST_CASE("identity operator has unit deltas") {
  const Shape s{16, 16};
  const auto op = make_gaussian_blur(s, 1.0, 0);
  for (const auto& b : {make_wavelet_basis(s, 6, 2), OrthoBasis::dft(s), OrthoBasis::canonical(s)}) {
    INFO(b.describe());
    const auto spec = compute_deltas(op, b, DeltaStrategy::exact);
    for (double d : spec.deltas()) REQUIRE(std::abs(d - 1.0) <= 1e-12);
    CHECK(spec.is_identity());
  }
}

TEST_CASE("gain operator in the canonical basis gives the gains") {
  const Image g({2, 3}, std::vector<double>{2.0, 0.5, 0.0, 1.0, 3.0, 4.0});
  const auto op = ForwardOperator::gain(g);
  const auto spec = compute_deltas(op, OrthoBasis::canonical(g.shape()), DeltaStrategy::exact);
  CHECK(spec.deltas() == std::vector<double>{2.0, 0.5, 0.0, 1.0, 3.0, 4.0});
  CHECK(spec.max_delta() == 4.0);
  CHECK(spec.is_zero(2));
  CHECK_FALSE(spec.is_zero(1));
  CHECK(spec.weights() == std::vector<double>{0.5, 2.0, 0.0, 1.0, 1.0 / 3.0, 0.25});
}

TEST_CASE("exact deltas agree with ||A psi_j|| from dense matrices") {
  const Shape s{4, 4};
  const std::vector<ForwardOperator> ops = {
      make_gaussian_blur(s, 1.2, 1),
      ForwardOperator::convolution(s, Image({1, 3}, std::vector<double>{0.25, -1.0, 0.5})),
      make_stripe_gain(s, {0.5, 2.0, 0.0, 1.5}),
      make_explicit(test::random_matrix(16, 16, 5), s, s),
  };
  const std::vector<OrthoBasis> bases = {make_wavelet_basis(s, 4, 1), make_wavelet_basis(s, 2, 2),
                                         OrthoBasis::canonical(s)};
  for (const auto& op : ops)
    for (const auto& b : bases) {
      INFO(op.describe() << " / " << b.describe());
      const Eigen::MatrixXd ap = operator_matrix(op) * basis_columns(b);
      const auto spec = compute_deltas(op, b, DeltaStrategy::exact);
      for (std::size_t u = 0; u < spec.deltas().size(); ++u)
        REQUIRE(std::abs(spec.deltas()[u] - ap.col(u).norm()) <= 1e-12);
    }
}

TEST_CASE("per-subband deltas equal exact deltas for a blur") {
  const Shape s{16, 16};
  const auto op = make_gaussian_blur(s, 2.0, 5);
  for (int taps : {2, 6, 12}) {
    const auto b = make_wavelet_basis(s, taps, 2);
    const auto exact = compute_deltas(op, b, DeltaStrategy::exact);
    const auto sub = compute_deltas(op, b, DeltaStrategy::per_subband);
    double worst = 0.0;
    for (std::size_t u = 0; u < exact.deltas().size(); ++u)
      worst = std::max(worst, std::abs(exact.deltas()[u] - sub.deltas()[u]));
    INFO(taps);
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("frequency deltas equal exact deltas for a convolution in the dft basis") {
  for (Shape s : {Shape{16, 16}, Shape{6, 9}, Shape{5, 8}}) {
    const auto b = OrthoBasis::dft(s);
    for (const auto& op : {make_gaussian_blur(s, 1.5, 2),
                           ForwardOperator::convolution(s, random_image({3, 3}, 17), ConvolutionPath::direct)}) {
      const auto exact = compute_deltas(op, b, DeltaStrategy::exact);
      const auto freq = compute_deltas(op, b, DeltaStrategy::frequency);
      double worst = 0.0;
      for (std::size_t u = 0; u < exact.deltas().size(); ++u)
        worst = std::max(worst, std::abs(exact.deltas()[u] - freq.deltas()[u]));
      INFO(to_string(s));
      CHECK(worst <= 1e-10);
    }
  }
}

TEST_CASE("reweighting") {
  const auto b = OrthoBasis::canonical({1, 3});
  const auto spec = from_values(b, {2.0, 0.0, 0.5});
  CHECK(spec.weights() == std::vector<double>{0.5, 0.0, 2.0});
  CHECK(reweight(spec, FilterMode::mask()).weights() == std::vector<double>{1.0, 0.0, 1.0});

  const auto tiny = reweight(spec, FilterMode::wiener(1e-14));
  CHECK(tiny.weights()[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(tiny.weights()[1] == 0.0);
  CHECK(tiny.weights()[2] == doctest::Approx(2.0).epsilon(1e-12));

  const auto one = from_values(OrthoBasis::canonical({1, 1}), {1.0}, FilterMode::wiener(1.0));
  CHECK(one.weights()[0] == 0.5);

  CHECK_THROWS_AS(reweight(spec, FilterMode::wiener(0.0)), std::invalid_argument);
  CHECK_THROWS_AS(reweight(spec, FilterMode::wiener(-1.0)), std::invalid_argument);
  CHECK(reweight(spec, FilterMode::wiener(0.25)).deltas() == spec.deltas());
}

TEST_CASE("relative zero threshold") {
  const auto b = OrthoBasis::canonical({1, 3});
  const auto spec = from_values(b, {10.0, 1e-11, 2e-10});
  CHECK(spec.threshold() == doctest::Approx(1e-11));
  CHECK(spec.is_zero(1));
  CHECK_FALSE(spec.is_zero(2));
  CHECK(spec.weights()[1] == 0.0);
  CHECK_THROWS_AS(from_values(b, {1.0, -1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(from_values(b, {1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("apply_filter") {
  SUBCASE("all-ones weights return the input unchanged") {
    const auto b = make_wavelet_basis({8, 8}, 4, 2);
    const auto spec = from_values(b, std::vector<double>(64, 1.0));
    const Image r = random_image({8, 8}, 2);
    CHECK(apply_filter(spec, b, r) == r);
  }
  SUBCASE("canonical weights act pixelwise") {
    const auto b = OrthoBasis::canonical({3, 3});
    std::vector<double> d(9, 1.0);
    d[0] = 0.0;
    d[4] = 0.5;
    const Image r = random_image({3, 3}, 8);
    const Image out = apply_filter(from_values(b, d), b, r);
    CHECK(out[0] == 0.0);
    CHECK(out[4] == 2.0 * r[4]);
    for (std::size_t i : {1, 2, 3, 5, 6, 7, 8}) CHECK(out[i] == r[i]);
  }
  SUBCASE("dense Psi W Psi^T oracle, wavelet basis") {
    const Shape s{8, 8};
    const auto b = make_wavelet_basis(s, 6, 2);
    const auto spec = compute_deltas(make_gaussian_blur(s, 1.0, 2), b, DeltaStrategy::exact);
    const Eigen::MatrixXd psi = basis_columns(b);
    Eigen::VectorXd w(spec.weights().size());
    for (std::size_t u = 0; u < spec.weights().size(); ++u) w(u) = spec.weights()[u];
    const Eigen::MatrixXd f = psi * w.asDiagonal() * psi.transpose();
    for (std::uint64_t k = 0; k < 5; ++k) {
      const Image r = random_image(s, 40 + k);
      const Eigen::VectorXd expect = f * test::to_eigen(r);
      CHECK((test::to_eigen(apply_filter(spec, b, r)) - expect).norm() <= 1e-10 * expect.norm());
    }
  }
  SUBCASE("dft basis: circulant filter with weights 1/|K(k)|") {
    const Shape s{6, 8};
    const Image kernel({3, 3}, std::vector<double>{0.0, 0.2, 0.0, 0.1, 0.4, 0.3, 0.0, 0.1, 0.05});
    const auto op = ForwardOperator::convolution(s, kernel, ConvolutionPath::direct);
    const auto b = OrthoBasis::dft(s);
    const auto spec = compute_deltas(op, b, DeltaStrategy::frequency);
    // |K| from the DFT of the response to a unit impulse at the origin
    Image impulse(s);
    impulse[0] = 1.0;
    const auto kh = naive_dft(op.apply(impulse), -1);
    const Image r = random_image(s, 12);
    auto rh = naive_dft(r, -1);
    for (std::size_t i = 0; i < rh.size(); ++i) rh[i] /= std::abs(kh[i]);
    Image expect(s);
    {
      const double pi = std::numbers::pi;
      for (std::size_t rr = 0; rr < s.rows; ++rr)
        for (std::size_t cc = 0; cc < s.cols; ++cc) {
          std::complex<double> acc = 0.0;
          for (std::size_t k = 0; k < s.rows; ++k)
            for (std::size_t l = 0; l < s.cols; ++l)
              acc += rh[k * s.cols + l] *
                     std::polar(1.0, 2.0 * pi * (double(k * rr) / s.rows + double(l * cc) / s.cols));
          expect(rr, cc) = acc.real() / double(s.size());
        }
    }
    CHECK(test::max_abs_diff(apply_filter(spec, b, r), expect) <= 1e-10);
  }
  SUBCASE("self-adjoint") {
    const Shape s{16, 16};
    const auto op = make_gaussian_blur(s, 1.5, 3);
    for (const auto& b : {make_wavelet_basis(s, 8, 3), OrthoBasis::dft(s)}) {
      const auto spec = compute_deltas(op, b, DeltaStrategy::exact);
      for (std::uint64_t k = 0; k < 10; ++k) {
        const Image r = random_image(s, 100 + k), q = random_image(s, 200 + k);
        const double lhs = dot(apply_filter(spec, b, r), q), rhs = dot(r, apply_filter(spec, b, q));
        REQUIRE(std::abs(lhs - rhs) <= 1e-10 * (std::abs(lhs) + 1.0));
      }
    }
  }
  SUBCASE("spectrum from another basis is rejected") {
    const Shape s{8, 8};
    const auto spec = from_values(OrthoBasis::canonical(s), std::vector<double>(64, 2.0));
    CHECK_THROWS_AS(apply_filter(spec, make_wavelet_basis(s, 2, 1), Image(s)), std::invalid_argument);
  }
}

TEST_CASE("filtered_gradient") {
  SUBCASE("diag(2, 0)") {
    const auto op = ForwardOperator::gain(Image({1, 2}, std::vector<double>{2.0, 0.0}));
    const auto b = OrthoBasis::canonical({1, 2});
    const auto spec = compute_deltas(op, b, DeltaStrategy::exact);
    const Image x({1, 2}, std::vector<double>{1.0, 5.0}), y({1, 2}, std::vector<double>{4.0, 7.0});
    CHECK(filtered_gradient(x, y, op, b, spec) == Image({1, 2}, std::vector<double>{-2.0, 0.0}));
  }
  SUBCASE("A = I gives x - y") {
    const Shape s{8, 8};
    const auto op = make_gaussian_blur(s, 1.0, 0);
    const auto b = make_wavelet_basis(s, 4, 2);
    const auto spec = compute_deltas(op, b, DeltaStrategy::exact);
    const Image x = random_image(s, 1), y = random_image(s, 2);
    CHECK(test::max_abs_diff(filtered_gradient(x, y, op, b, spec), x - y) <= 1e-12);
  }
  SUBCASE("svd basis: V S^+ V^T A^T (A x - y) and the closed form") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const Matrix m = test::random_matrix(10, 10, seed);
      const auto op = make_explicit(m, {2, 5}, {2, 5});
      const auto b = make_svd_basis(op);
      const auto spec = compute_deltas(op, b, DeltaStrategy::exact);
      const Image x = random_image({2, 5}, 50 + seed), y = random_image({2, 5}, 80 + seed);
      const Image g = filtered_gradient(x, y, op, b, spec);

      const Eigen::MatrixXd a = test::to_eigen(m);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const Eigen::VectorXd sinv = svd.singularValues().cwiseInverse();
      const Eigen::VectorXd expect = svd.matrixV() * sinv.asDiagonal() * svd.matrixV().transpose() * a.transpose() *
                                     (a * test::to_eigen(x) - test::to_eigen(y));
      INFO(seed);
      CHECK((test::to_eigen(g) - expect).norm() <= 1e-8 * expect.norm());
      CHECK(test::rel_diff(g, exact_gradient_svd(x, y, b)) <= 1e-8);
    }
  }
  SUBCASE("coefficients with zero delta have no influence") {
    const auto op = make_stripe_gain({4, 4}, {1.0, 0.0, 2.0, 0.5});
    const auto b = OrthoBasis::canonical({4, 4});
    const auto spec = compute_deltas(op, b, DeltaStrategy::exact);
    const Image x = random_image({4, 4}, 3);
    const Image g1 = filtered_gradient(x, random_image({4, 4}, 4), op, b, spec);
    const Image g2 = filtered_gradient(x, random_image({4, 4}, 5, 100.0), op, b, spec);
    for (std::size_t r = 0; r < 4; ++r) {
      CHECK(g1(r, 1) == 0.0);
      CHECK(g2(r, 1) == 0.0);
    }
  }
  SUBCASE("a kernel with negative eigenvalues still gives a positive semidefinite W A^T A") {
    const Shape s{8, 8};
    const auto op = ForwardOperator::convolution(s, Image({1, 3}, std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3}));
    bool negative = false;
    for (auto v : op.kernel_spectrum()) negative |= v.real() < -1e-9;
    REQUIRE(negative);
    const auto b = OrthoBasis::dft(s);
    const auto spec = compute_deltas(op, b, DeltaStrategy::frequency);
    const Image zero(s);
    for (std::uint64_t k = 0; k < 20; ++k) {
      const Image x = random_image(s, 300 + k);
      CHECK(dot(x, filtered_gradient(x, zero, op, b, spec)) >= -1e-12);
    }
  }
}

TEST_CASE("exact_gradient_svd") {
  SUBCASE("A = I") {
    const auto op = make_explicit(Matrix::identity(6), {2, 3}, {2, 3});
    const auto b = make_svd_basis(op);
    const Image x = random_image({2, 3}, 1), y = random_image({2, 3}, 2);
    CHECK(test::max_abs_diff(exact_gradient_svd(x, y, b), x - y) <= 1e-12);
  }
  SUBCASE("consistent data gives a zero gradient") {
    const auto op = make_explicit(test::random_matrix(9, 9, 6), {3, 3}, {3, 3});
    const auto b = make_svd_basis(op);
    const Image x = random_image({3, 3}, 7);
    CHECK(norm(exact_gradient_svd(x, op.apply(x), b)) <= 1e-10 * norm(x));
  }
  SUBCASE("gradient of 1/2 x^T Psi Delta Psi^T x - x^T Psi D Phi^T y by finite differences") {
    Matrix m = test::random_matrix(8, 8, 9);
    for (std::size_t r = 0; r < 8; ++r) m(r, 7) = m(r, 0);  // rank deficient
    const auto op = make_explicit(m, {2, 4}, {2, 4});
    const auto b = make_svd_basis(op);
    const Image y = random_image({2, 4}, 10);
    const Image gy = exact_gradient_svd(Image({2, 4}), y, b);
    const auto f = [&](const Image& x) {
      // the gradient is affine: g(x) = H x - c with c = -g(0)
      const Image hx = exact_gradient_svd(x, y, b) - gy;
      return 0.5 * dot(x, hx) + dot(x, gy);
    };
    const Image x = random_image({2, 4}, 11);
    const Image g = exact_gradient_svd(x, y, b);
    for (std::size_t i = 0; i < x.size(); ++i) {
      Image p = x, q = x;
      p[i] += 1e-5;
      q[i] -= 1e-5;
      CHECK(std::abs((f(p) - f(q)) / 2e-5 - g[i]) <= 1e-5);
    }
    // the null direction (e0 - e7) is masked out
    Image nd({2, 4});
    nd[0] = 1.0;
    nd[7] = -1.0;
    CHECK(std::abs(dot(g, nd)) <= 1e-10);
  }
  CHECK_THROWS_AS(exact_gradient_svd(Image({2, 2}), Image({2, 2}), OrthoBasis::canonical({2, 2})),
                  std::invalid_argument);
}

TEST_CASE("spectrum cache") {
  test::TempDir dir;
  const Shape s{16, 16};
  const auto op = make_gaussian_blur(s, 2.0, 4);
  const auto b = make_wavelet_basis(s, 6, 2);
  const auto path = spectrum_cache_path(dir.path(), op, b, DeltaStrategy::per_subband);
  CHECK_FALSE(std::filesystem::exists(path));

  const auto first = compute_deltas_cached(op, b, DeltaStrategy::per_subband, dir.path());
  REQUIRE(std::filesystem::exists(path));
  CHECK(std::filesystem::exists(std::filesystem::path(path).concat(".txt")));
  const auto second = compute_deltas_cached(op, b, DeltaStrategy::per_subband, dir.path());
  CHECK(second.deltas() == first.deltas());

  // a hit really reads the file
  write_fidb(Image({1, first.deltas().size()}, 3.0), path);
  CHECK(compute_deltas_cached(op, b, DeltaStrategy::per_subband, dir.path()).max_delta() == 3.0);

  CHECK(spectrum_cache_path(dir.path(), op, b, DeltaStrategy::exact) != path);
  CHECK(spectrum_cache_path(dir.path(), make_gaussian_blur(s, 2.5, 4), b, DeltaStrategy::per_subband) != path);
  CHECK(spectrum_cache_path(dir.path(), op, make_wavelet_basis(s, 6, 3), DeltaStrategy::per_subband) != path);
  CHECK_THROWS(read_spectrum(path, OrthoBasis::dft(s)));
  CHECK(compute_deltas_cached(op, b, DeltaStrategy::exact, std::nullopt).deltas().size() == 256);
}

TEST_CASE("strategy preconditions") {
  const Shape s{8, 8};
  const auto blur = make_gaussian_blur(s, 1.0, 1);
  const auto gain = make_stripe_gain(s, std::vector<double>(8, 1.0));
  CHECK_THROWS_AS(compute_deltas(blur, OrthoBasis::dft(s), DeltaStrategy::per_subband), std::invalid_argument);
  CHECK_THROWS_AS(compute_deltas(gain, make_wavelet_basis(s, 2, 1), DeltaStrategy::per_subband),
                  std::invalid_argument);
  CHECK_THROWS_AS(compute_deltas(blur, make_wavelet_basis(s, 2, 1), DeltaStrategy::frequency), std::invalid_argument);
  CHECK_THROWS_AS(compute_deltas(gain, OrthoBasis::dft(s), DeltaStrategy::frequency), std::invalid_argument);
  CHECK_THROWS_AS(compute_deltas(blur, OrthoBasis::canonical({4, 4}), DeltaStrategy::exact), std::invalid_argument);

  const auto other = make_svd_basis(make_explicit(test::random_matrix(4, 4, 1), {2, 2}, {2, 2}));
  CHECK_THROWS_AS(compute_deltas(make_gaussian_blur({2, 2}, 1.0, 0), other, DeltaStrategy::exact),
                  std::invalid_argument);

  const Shape big{257, 256};
  const auto big_gain = make_stripe_gain(big, std::vector<double>(256, 2.0));
  CHECK_THROWS_AS(compute_deltas(big_gain, OrthoBasis::canonical(big), DeltaStrategy::exact), std::invalid_argument);
  DeltaOptions force;
  force.force = true;
  CHECK(compute_deltas(big_gain, OrthoBasis::canonical(big), DeltaStrategy::exact, force).max_delta() == 2.0);
}
