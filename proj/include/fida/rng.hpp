#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "fida/image.hpp"

namespace fida {

struct RngSeed {
  std::uint64_t value = 0;
};

/// Standard normal draws from std::mt19937_64 via Box-Muller. Both the engine
/// (fixed by the standard) and the transform are implemented without
/// std::normal_distribution, so a seed reproduces the same stream on every
/// platform.
class GaussianStream {
 public:
  explicit GaussianStream(RngSeed seed) : engine_(seed.value) {}

  double next();
  /// Uniform draw in [0, 1) with 53 random bits.
  double uniform();

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

/// Each pixel perturbed by independent N(0, sigma^2). No clamping.
Image add_gaussian_noise(const Image& img, double sigma, RngSeed seed);

/// 64-bit FNV-1a; used for seed derivation and cache keys.
class Fnv1a {
 public:
  Fnv1a& bytes(const void* data, std::size_t n);
  Fnv1a& str(std::string_view s);
  Fnv1a& u64(std::uint64_t v);
  Fnv1a& f64(double v);
  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace fida
