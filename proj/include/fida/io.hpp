#pragma once

#include <filesystem>
#include <vector>

#include "fida/image.hpp"
#include "fida/matrix.hpp"

namespace fida {

// FIDB: "FIDB", u32 version (1), u32 rows, u32 cols, rows*cols f64, row-major.
// FIDM: "FIDM", u32 version (1), u32 rows, u32 cols, rows*cols f64, column-major.
// All integers and doubles are little-endian.
inline constexpr std::uint32_t kFidbVersion = 1;

void write_fidb(const Image& img, const std::filesystem::path& path);
Image read_fidb(const std::filesystem::path& path);

void write_matrix(const Matrix& m, const std::filesystem::path& path);
Matrix read_matrix(const std::filesystem::path& path);

/// 8-bit PGM, P5 (binary) or P2 (ASCII). Values are clamped to [0, 255] and
/// rounded half-to-even on write.
void write_pgm(const Image& img, const std::filesystem::path& path, bool ascii = false);
Image read_pgm(const std::filesystem::path& path);

/// Dispatches on the file magic: FIDB or PGM.
Image read_image(const std::filesystem::path& path);
/// Dispatches on the extension: ".pgm" writes PGM, anything else FIDB.
void write_image(const Image& img, const std::filesystem::path& path);

/// One value per line; blank lines and '#' comments are skipped.
std::vector<double> read_values(const std::filesystem::path& path);

}  // namespace fida
