#include "fida/rng.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fida {

double GaussianStream::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double GaussianStream::next() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  // u1 in (0, 1] keeps the log finite.
  const double u1 = static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

Image add_gaussian_noise(const Image& img, double sigma, RngSeed seed) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("noise sigma must be nonnegative");
  Image out = img;
  if (sigma == 0.0) return out;
  GaussianStream g(seed);
  for (double& v : out.data()) v += sigma * g.next();
  return out;
}

Fnv1a& Fnv1a::bytes(const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    state_ ^= p[i];
    state_ *= 0x100000001b3ULL;
  }
  return *this;
}

Fnv1a& Fnv1a::str(std::string_view s) {
  u64(s.size());
  return bytes(s.data(), s.size());
}

Fnv1a& Fnv1a::u64(std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  return bytes(b, 8);
}

Fnv1a& Fnv1a::f64(double v) { return u64(std::bit_cast<std::uint64_t>(v)); }

}  // namespace fida
