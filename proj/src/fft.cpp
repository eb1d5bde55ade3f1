#include "fida/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>
#include <vector>

namespace fida {

struct RealFft2d::Plans {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
  ~Plans() {
    if (forward) fftw_destroy_plan(forward);
    if (inverse) fftw_destroy_plan(inverse);
  }
};

namespace {

// The FFTW planner is not thread safe; execution with new arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::shared_ptr<const RealFft2d::Plans> plans_for(Shape shape) {
  static std::map<std::pair<std::size_t, std::size_t>, std::shared_ptr<const RealFft2d::Plans>> cache;
  std::lock_guard lock(planner_mutex());
  const auto key = std::make_pair(shape.rows, shape.cols);
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  const int rows = static_cast<int>(shape.rows);
  const int cols = static_cast<int>(shape.cols);
  std::vector<double> real(shape.size());
  std::vector<std::complex<double>> spec(shape.rows * (shape.cols / 2 + 1));
  auto plans = std::make_shared<RealFft2d::Plans>();
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  plans->forward =
      fftw_plan_dft_r2c_2d(rows, cols, real.data(), reinterpret_cast<fftw_complex*>(spec.data()), flags);
  plans->inverse =
      fftw_plan_dft_c2r_2d(rows, cols, reinterpret_cast<fftw_complex*>(spec.data()), real.data(), flags);
  if (!plans->forward || !plans->inverse) throw std::runtime_error("FFTW planning failed for " + to_string(shape));
  cache.emplace(key, plans);
  return plans;
}

}  // namespace

RealFft2d::RealFft2d(Shape shape) : shape_(shape), plans_(plans_for(shape)) {}

void RealFft2d::forward(std::span<const double> in, std::span<std::complex<double>> out) const {
  if (in.size() != shape_.size() || out.size() != spectrum_size())
    throw std::invalid_argument("RealFft2d::forward: buffer size mismatch");
  // r2c leaves the input untouched.
  fftw_execute_dft_r2c(plans_->forward, const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void RealFft2d::inverse(std::span<const std::complex<double>> in, std::span<double> out) const {
  if (in.size() != spectrum_size() || out.size() != shape_.size())
    throw std::invalid_argument("RealFft2d::inverse: buffer size mismatch");
  // Multi-dimensional c2r overwrites its input.
  std::vector<std::complex<double>> scratch(in.begin(), in.end());
  fftw_execute_dft_c2r(plans_->inverse, reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
}

}  // namespace fida
