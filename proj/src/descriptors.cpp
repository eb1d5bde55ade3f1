#include "fida/descriptors.hpp"

#include <charconv>
#include <chrono>
#include <stdexcept>

#include "fida/io.hpp"

namespace fida {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad(const Descriptor& d, const std::string& key, const std::string& why) {
  throw std::invalid_argument(d.kind + ": parameter '" + key + "' " + why);
}

}  // namespace

std::string Descriptor::text(const std::string& key, const std::string& fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

double Descriptor::number(const std::string& key, double fallback) const {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  const std::string& s = it->second;
  double v = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) bad(*this, key, "is not a number: '" + s + "'");
  return v;
}

std::int64_t Descriptor::integer(const std::string& key, std::int64_t fallback) const {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  const std::string& s = it->second;
  std::int64_t v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) bad(*this, key, "is not an integer: '" + s + "'");
  return v;
}

bool Descriptor::flag(const std::string& key, bool fallback) const {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  const std::string& s = it->second;
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  bad(*this, key, "is not a boolean: '" + s + "'");
}

void Descriptor::allow_only(std::initializer_list<std::string_view> allowed) const {
  for (const auto& [k, v] : params) {
    bool ok = false;
    for (auto a : allowed) ok = ok || a == k;
    if (!ok) bad(*this, k, "is not recognized");
  }
}

Descriptor parse_descriptor(std::string_view text) {
  text = trim(text);
  Descriptor d;
  const auto colon = text.find(':');
  d.kind = std::string(trim(text.substr(0, colon)));
  if (d.kind.empty()) throw std::invalid_argument("empty descriptor");
  if (colon == std::string_view::npos) return d;
  std::string_view rest = text.substr(colon + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = trim(rest.substr(0, comma));
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0)
      throw std::invalid_argument(d.kind + ": expected key=value, got '" + std::string(item) + "'");
    std::string key(trim(item.substr(0, eq)));
    std::string value(trim(item.substr(eq + 1)));
    if (!d.params.emplace(key, value).second) throw std::invalid_argument(d.kind + ": duplicate key '" + key + "'");
  }
  return d;
}

std::string to_string(const Descriptor& d) {
  std::string out = d.kind;
  char sep = ':';
  for (const auto& [k, v] : d.params) {
    out += sep;
    out += k + "=" + v;
    sep = ',';
  }
  return out;
}

ForwardOperator make_operator(const Descriptor& d, Shape shape) {
  if (d.kind == "blur") {
    d.allow_only({"sigma", "radius", "path"});
    const double sigma = d.number("sigma", 2.0);
    const auto radius = d.integer("radius", 7);
    if (radius < 0) bad(d, "radius", "must be nonnegative");
    const std::string p = d.text("path", "auto");
    ConvolutionPath path = ConvolutionPath::automatic;
    if (p == "direct")
      path = ConvolutionPath::direct;
    else if (p == "fft")
      path = ConvolutionPath::fft;
    else if (p != "auto")
      bad(d, "path", "must be auto, direct or fft");
    return make_gaussian_blur(shape, sigma, static_cast<std::size_t>(radius), path);
  }
  if (d.kind == "kernel") {
    d.allow_only({"file"});
    if (!d.has("file")) bad(d, "file", "is required");
    return ForwardOperator::convolution(shape, read_image(d.text("file", "")));
  }
  if (d.kind == "gain") {
    d.allow_only({"lo", "hi", "seed", "file", "axis"});
    const std::string a = d.text("axis", "columns");
    GainAxis axis = GainAxis::columns;
    if (a == "rows")
      axis = GainAxis::rows;
    else if (a != "columns")
      bad(d, "axis", "must be columns or rows");
    const std::size_t count = axis == GainAxis::columns ? shape.cols : shape.rows;
    std::vector<double> gains;
    if (d.has("file")) {
      if (d.has("lo") || d.has("hi") || d.has("seed")) bad(d, "file", "cannot be combined with lo/hi/seed");
      gains = read_values(d.text("file", ""));
    } else {
      const auto seed = d.integer("seed", static_cast<std::int64_t>(kDefaultGainSeed));
      gains = random_stripe_gains(count, d.number("lo", 0.5), d.number("hi", 1.5), static_cast<std::uint64_t>(seed));
    }
    return make_stripe_gain(shape, gains, axis);
  }
  if (d.kind == "identity") {
    d.allow_only({});
    return make_stripe_gain(shape, std::vector<double>(shape.cols, 1.0));
  }
  if (d.kind == "matrix") {
    d.allow_only({"file", "out_rows", "out_cols"});
    if (!d.has("file")) bad(d, "file", "is required");
    Matrix m = read_matrix(d.text("file", ""));
    Shape out = shape;
    if (d.has("out_rows") || d.has("out_cols")) {
      out = Shape{static_cast<std::size_t>(d.integer("out_rows", 1)), static_cast<std::size_t>(d.integer("out_cols", 1))};
    }
    return make_explicit(std::move(m), shape, out);
  }
  throw std::invalid_argument("unknown operator kind '" + d.kind + "' (expected blur, kernel, gain, identity, matrix)");
}

ForwardOperator make_operator(std::string_view text, Shape shape) { return make_operator(parse_descriptor(text), shape); }

OrthoBasis make_basis(const Descriptor& d, Shape shape, const ForwardOperator* op) {
  if (d.kind == "wavelet") {
    d.allow_only({"taps", "levels"});
    return make_wavelet_basis(shape, static_cast<int>(d.integer("taps", 6)), static_cast<int>(d.integer("levels", 4)));
  }
  if (d.kind == "dft") {
    d.allow_only({});
    return OrthoBasis::dft(shape);
  }
  if (d.kind == "canonical") {
    d.allow_only({});
    return OrthoBasis::canonical(shape);
  }
  if (d.kind == "svd") {
    d.allow_only({});
    if (!op) throw std::invalid_argument("svd basis needs an operator");
    return make_svd_basis(*op);
  }
  if (d.kind == "file") {
    d.allow_only({"path"});
    if (!d.has("path")) bad(d, "path", "is required");
    return load_basis(d.text("path", ""), shape);
  }
  throw std::invalid_argument("unknown basis kind '" + d.kind + "' (expected wavelet, dft, canonical, svd, file)");
}

std::string diagonalizing_basis(const ForwardOperator& op) {
  switch (op.kind()) {
    case OperatorKind::circular_convolution: return "dft";
    case OperatorKind::diagonal_gain: return "canonical";
    case OperatorKind::explicit_matrix: return "svd";
  }
  throw std::logic_error("unreachable operator kind");
}

FilterMode parse_mode(std::string_view text) {
  const Descriptor d = parse_descriptor(text);
  if (d.kind == "pinv" || d.kind == "pseudo-inverse") {
    d.allow_only({});
    return FilterMode::pseudo_inverse();
  }
  if (d.kind == "wiener") {
    d.allow_only({"tau"});
    if (!d.has("tau")) bad(d, "tau", "is required");
    const double tau = d.number("tau", 0.0);
    if (!(tau > 0.0)) bad(d, "tau", "must be positive");
    return FilterMode::wiener(tau);
  }
  if (d.kind == "mask") {
    d.allow_only({});
    return FilterMode::mask();
  }
  throw std::invalid_argument("unknown filter mode '" + d.kind + "' (expected pinv, wiener:tau=..., mask)");
}

std::optional<DeltaStrategy> parse_strategy(std::string_view text) {
  if (text == "auto") return std::nullopt;
  if (text == "exact") return DeltaStrategy::exact;
  if (text == "per-subband") return DeltaStrategy::per_subband;
  if (text == "frequency") return DeltaStrategy::frequency;
  throw std::invalid_argument("unknown delta strategy '" + std::string(text) +
                              "' (expected exact, per-subband, frequency, auto)");
}

DeltaStrategy default_strategy(const ForwardOperator& op, const OrthoBasis& basis) {
  if (op.kind() == OperatorKind::circular_convolution) {
    if (basis.kind() == BasisKind::dft) return DeltaStrategy::frequency;
    if (basis.kind() == BasisKind::wavelet) return DeltaStrategy::per_subband;
  }
  return DeltaStrategy::exact;
}

Denoiser make_denoiser(const Descriptor& d, Shape shape) {
  if (d.kind == "wavelet-soft" || d.kind == "wavelet-hard") {
    d.allow_only({"taps", "levels", "coarse"});
    OrthoBasis b =
        make_wavelet_basis(shape, static_cast<int>(d.integer("taps", 6)), static_cast<int>(d.integer("levels", 4)));
    const bool coarse = d.flag("coarse", false);
    return d.kind == "wavelet-soft" ? Denoiser::soft(std::move(b), coarse) : Denoiser::hard(std::move(b), coarse);
  }
  if (d.kind == "canonical-soft" || d.kind == "canonical-hard") {
    d.allow_only({});
    OrthoBasis b = OrthoBasis::canonical(shape);
    return d.kind == "canonical-soft" ? Denoiser::soft(std::move(b)) : Denoiser::hard(std::move(b));
  }
  if (d.kind == "external") {
    d.allow_only({"cmd", "timeout"});
    if (!d.has("cmd")) bad(d, "cmd", "is required");
    const double seconds = d.number("timeout", 120.0);
    if (!(seconds > 0.0)) bad(d, "timeout", "must be positive");
    const auto ms = std::chrono::milliseconds(static_cast<std::int64_t>(seconds * 1000.0));
    return Denoiser::external(ExternalDenoiser(d.text("cmd", ""), ms));
  }
  throw std::invalid_argument("unknown denoiser '" + d.kind +
                              "' (expected wavelet-soft, wavelet-hard, canonical-soft, canonical-hard, external)");
}

Denoiser make_denoiser(std::string_view text, Shape shape) { return make_denoiser(parse_descriptor(text), shape); }

}  // namespace fida
