#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fida/denoisers.hpp"
#include "fida/operators.hpp"
#include "fida/spectrum.hpp"
#include "fida/transforms.hpp"

namespace fida {

/// `kind` or `kind:key=value,key=value`. Keys are unique; values are kept as
/// text and converted on access.
struct Descriptor {
  std::string kind;
  std::map<std::string, std::string> params;

  bool has(const std::string& key) const { return params.count(key) != 0; }
  std::string text(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key, double fallback) const;
  std::int64_t integer(const std::string& key, std::int64_t fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  /// Throws if any key is outside `allowed`.
  void allow_only(std::initializer_list<std::string_view> allowed) const;
};

Descriptor parse_descriptor(std::string_view text);
/// Canonical text form (keys sorted); parse_descriptor(to_string(d)) == d.
std::string to_string(const Descriptor& d);

inline constexpr std::uint64_t kDefaultGainSeed = 20170601;

/// blur:sigma=2,radius=7[,path=auto|direct|fft]
/// gain[:lo=0.5,hi=1.5,seed=20170601][,file=gains.txt][,axis=columns|rows]
/// identity
/// matrix:file=op.fidm[,out_rows=..,out_cols=..]
/// kernel:file=k.fidb  (explicit convolution kernel)
ForwardOperator make_operator(const Descriptor& d, Shape shape);
ForwardOperator make_operator(std::string_view text, Shape shape);

/// wavelet[:taps=6,levels=4] | dft | canonical | svd | file:path=basis.fidm
/// The svd kind needs the (explicit) operator.
OrthoBasis make_basis(const Descriptor& d, Shape shape, const ForwardOperator* op = nullptr);

/// The basis that diagonalizes `op`: dft for convolutions, canonical for
/// gains, svd for explicit matrices.
std::string diagonalizing_basis(const ForwardOperator& op);

/// pinv | wiener:tau=0.01 | mask
FilterMode parse_mode(std::string_view text);

/// exact | per-subband | frequency | auto
std::optional<DeltaStrategy> parse_strategy(std::string_view text);
/// frequency for convolution+dft, per-subband for convolution+wavelet,
/// exact otherwise.
DeltaStrategy default_strategy(const ForwardOperator& op, const OrthoBasis& basis);

/// wavelet-soft[:taps=6,levels=4,coarse=0] | wavelet-hard[...] |
/// canonical-soft | canonical-hard | external:cmd=/path/tool[,timeout=120]
Denoiser make_denoiser(const Descriptor& d, Shape shape);
Denoiser make_denoiser(std::string_view text, Shape shape);

}  // namespace fida
