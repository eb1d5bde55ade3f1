#include "fida/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fida {

namespace {

// Coordinates are normalized to [0,1) so the scene scales with the shape.
Image geometric(Shape s) {
  Image img(s);
  const double pi = std::numbers::pi;
  for (std::size_t r = 0; r < s.rows; ++r) {
    for (std::size_t c = 0; c < s.cols; ++c) {
      const double y = (r + 0.5) / s.rows;
      const double x = (c + 0.5) / s.cols;
      double v = 60.0 + 50.0 * x + 20.0 * y;

      if (x > 0.08 && x < 0.42 && y > 0.10 && y < 0.38) v = 185.0;
      if (std::hypot(x - 0.70, y - 0.28) < 0.17) v = 225.0;
      if (std::hypot(x - 0.70, y - 0.28) < 0.07) v = 30.0;
      {
        const double dx = (x - 0.30) / 0.20, dy = (y - 0.70) / 0.11;
        if (dx * dx + dy * dy < 1.0) v = 150.0 + 40.0 * dx;
      }
      // triangle with vertices (0.58,0.88) (0.92,0.88) (0.75,0.55)
      if (y < 0.88 && y > 0.55 && std::abs(x - 0.75) < (y - 0.55) * (0.17 / 0.33)) v = 110.0;
      // soft blob
      v += 45.0 * std::exp(-(std::pow(x - 0.15, 2) + std::pow(y - 0.88, 2)) / (2 * 0.05 * 0.05));
      // shaded stripe
      if (y > 0.44 && y < 0.52 && x > 0.55) v = 90.0 + 60.0 * std::sin(pi * (x - 0.55) / 0.45);
      img(r, c) = std::clamp(v, 0.0, 255.0);
    }
  }
  return img;
}

Image bars(Shape s) {
  Image img(s, 40.0);
  for (std::size_t r = 0; r < s.rows; ++r) {
    for (std::size_t c = 0; c < s.cols; ++c) {
      const double y = (r + 0.5) / s.rows;
      const double x = (c + 0.5) / s.cols;
      if (y < 0.5) {
        const int group = static_cast<int>(x * 4);
        const double period = 0.08 / (group + 1);
        if (std::fmod(x, period) < period / 2) img(r, c) = 210.0;
      } else {
        const int group = static_cast<int>(x * 4);
        const double period = 0.08 / (group + 1);
        if (std::fmod(y, period) < period / 2) img(r, c) = 170.0;
      }
    }
  }
  return img;
}

Image smooth(Shape s) {
  Image img(s);
  const double pi = std::numbers::pi;
  for (std::size_t r = 0; r < s.rows; ++r) {
    for (std::size_t c = 0; c < s.cols; ++c) {
      const double y = static_cast<double>(r) / s.rows;
      const double x = static_cast<double>(c) / s.cols;
      img(r, c) = 128.0 + 60.0 * std::sin(2 * pi * x) * std::cos(2 * pi * y) + 30.0 * std::cos(4 * pi * (x + y));
    }
  }
  return img;
}

}  // namespace

Image make_phantom(std::string_view name, Shape shape) {
  if (shape.rows == 0 || shape.cols == 0) throw std::invalid_argument("phantom shape must be nonempty");
  if (name == "geometric") return geometric(shape);
  if (name == "bars") return bars(shape);
  if (name == "smooth") return smooth(shape);
  throw std::invalid_argument("unknown phantom '" + std::string(name) + "' (expected geometric, bars, smooth)");
}

std::vector<std::string> phantom_names() { return {"geometric", "bars", "smooth"}; }

}  // namespace fida
