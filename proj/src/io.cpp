#include "fida/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace fida {

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& os, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& is, const std::filesystem::path& path) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error(path.string() + ": truncated header");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::vector<double> get_f64s(std::istream& is, std::size_t count, const std::filesystem::path& path) {
  std::vector<unsigned char> raw(count * 8);
  if (!is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size())))
    throw std::runtime_error(path.string() + ": truncated payload");
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(raw[k * 8 + i]) << (8 * i);
    out[k] = std::bit_cast<double>(bits);
  }
  return out;
}

struct Header {
  std::uint32_t rows, cols;
};

Header read_header(std::istream& is, const char* magic, const std::filesystem::path& path) {
  char m[4];
  if (!is.read(m, 4) || std::memcmp(m, magic, 4) != 0)
    throw std::runtime_error(path.string() + ": not a " + std::string(magic, 4) + " file");
  const std::uint32_t version = get_u32(is, path);
  if (version != kFidbVersion) throw std::runtime_error(path.string() + ": unsupported version " + std::to_string(version));
  Header h{get_u32(is, path), get_u32(is, path)};
  if (h.rows == 0 || h.cols == 0) throw std::runtime_error(path.string() + ": empty dimensions");
  return h;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return is;
}

// Next whitespace-delimited PGM header token, skipping '#' comments.
std::string pgm_token(std::istream& is, const std::filesystem::path& path) {
  std::string tok;
  int ch;
  while ((ch = is.get()) != EOF) {
    if (ch == '#') {
      while ((ch = is.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  if (tok.empty()) throw std::runtime_error(path.string() + ": malformed PGM header");
  return tok;
}

std::size_t pgm_number(std::istream& is, const std::filesystem::path& path) {
  const std::string t = pgm_token(is, path);
  std::size_t pos = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(t, &pos);
  } catch (...) {
    pos = 0;
  }
  if (pos != t.size()) throw std::runtime_error(path.string() + ": malformed PGM header token '" + t + "'");
  return v;
}

}  // namespace

void write_fidb(const Image& img, const std::filesystem::path& path) {
  auto os = open_out(path);
  os.write("FIDB", 4);
  put_u32(os, kFidbVersion);
  put_u32(os, static_cast<std::uint32_t>(img.rows()));
  put_u32(os, static_cast<std::uint32_t>(img.cols()));
  for (double v : img.data()) put_f64(os, v);
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

Image read_fidb(const std::filesystem::path& path) {
  auto is = open_in(path);
  const Header h = read_header(is, "FIDB", path);
  return Image(Shape{h.rows, h.cols}, get_f64s(is, std::size_t{h.rows} * h.cols, path));
}

void write_matrix(const Matrix& m, const std::filesystem::path& path) {
  auto os = open_out(path);
  os.write("FIDM", 4);
  put_u32(os, kFidbVersion);
  put_u32(os, static_cast<std::uint32_t>(m.rows()));
  put_u32(os, static_cast<std::uint32_t>(m.cols()));
  for (std::size_t c = 0; c < m.cols(); ++c)
    for (std::size_t r = 0; r < m.rows(); ++r) put_f64(os, m(r, c));
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

Matrix read_matrix(const std::filesystem::path& path) {
  auto is = open_in(path);
  const Header h = read_header(is, "FIDM", path);
  const auto col_major = get_f64s(is, std::size_t{h.rows} * h.cols, path);
  Matrix m(h.rows, h.cols);
  for (std::size_t c = 0; c < h.cols; ++c)
    for (std::size_t r = 0; r < h.rows; ++r) m(r, c) = col_major[c * h.rows + r];
  return m;
}

void write_pgm(const Image& img, const std::filesystem::path& path, bool ascii) {
  auto os = open_out(path);
  os << (ascii ? "P2" : "P5") << "\n" << img.cols() << " " << img.rows() << "\n255\n";
  std::vector<unsigned char> bytes(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) {
    double v = img[i];
    if (std::isnan(v)) v = 0.0;
    v = std::clamp(v, 0.0, 255.0);
    bytes[i] = static_cast<unsigned char>(std::nearbyint(v));  // default rounding mode: half-to-even
  }
  if (ascii) {
    for (std::size_t r = 0; r < img.rows(); ++r) {
      for (std::size_t c = 0; c < img.cols(); ++c) os << (c ? " " : "") << static_cast<int>(bytes[r * img.cols() + c]);
      os << "\n";
    }
  } else {
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

Image read_pgm(const std::filesystem::path& path) {
  auto is = open_in(path);
  const std::string magic = pgm_token(is, path);
  if (magic != "P5" && magic != "P2") throw std::runtime_error(path.string() + ": not a P2/P5 PGM file");
  const std::size_t cols = pgm_number(is, path);
  const std::size_t rows = pgm_number(is, path);
  const std::size_t maxval = pgm_number(is, path);
  if (rows == 0 || cols == 0) throw std::runtime_error(path.string() + ": empty PGM");
  if (maxval == 0 || maxval > 255) throw std::runtime_error(path.string() + ": unsupported PGM max value " + std::to_string(maxval));
  Image img(Shape{rows, cols});
  if (magic == "P5") {
    std::vector<unsigned char> bytes(rows * cols);
    if (!is.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size())))
      throw std::runtime_error(path.string() + ": truncated PGM payload");
    for (std::size_t i = 0; i < bytes.size(); ++i) img[i] = bytes[i];
  } else {
    for (std::size_t i = 0; i < img.size(); ++i) {
      std::size_t v = 0;
      try {
        v = pgm_number(is, path);
      } catch (const std::runtime_error&) {
        throw std::runtime_error(path.string() + ": truncated PGM payload");
      }
      if (v > maxval) throw std::runtime_error(path.string() + ": PGM sample exceeds max value");
      img[i] = static_cast<double>(v);
    }
  }
  if (maxval != 255)
    for (double& v : img.data()) v = v * 255.0 / static_cast<double>(maxval);
  return img;
}

Image read_image(const std::filesystem::path& path) {
  auto is = open_in(path);
  char m[4] = {};
  is.read(m, 4);
  if (is.gcount() == 4 && std::memcmp(m, "FIDB", 4) == 0) return read_fidb(path);
  if (is.gcount() >= 2 && m[0] == 'P' && (m[1] == '5' || m[1] == '2')) return read_pgm(path);
  throw std::runtime_error(path.string() + ": unrecognized image format (expected FIDB or PGM)");
}

void write_image(const Image& img, const std::filesystem::path& path) {
  if (path.extension() == ".pgm")
    write_pgm(img, path);
  else
    write_fidb(img, path);
}

std::vector<double> read_values(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double v;
    if (!(ls >> v)) {
      std::string rest;
      if (std::istringstream(line) >> rest) throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": not a number");
      continue;
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace fida
