#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fida/image.hpp"

namespace fida {

/// Deterministic synthetic test images in [0, 255], used when the standard
/// photographs are not available offline.
///   geometric  piecewise-smooth scene: shaded background, disks, ellipses,
///              rectangles, a triangle and a soft blob
///   bars       vertical and horizontal bar groups of increasing frequency
///   smooth     low-frequency sinusoid mix
Image make_phantom(std::string_view name, Shape shape = Shape{256, 256});
std::vector<std::string> phantom_names();

}  // namespace fida
