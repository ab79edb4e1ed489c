#pragma once

#include <cctype>
#include <cstddef>
#include <string>

#include "pgen/common/error.hpp"
#include "pgen/mask.hpp"

namespace pgen {

// SINGLE: frame only. AF: two streams joined by elementwise add. CF: one
// stream over the 2-channel frame/mask stack. EF: three mask convolutions
// added after the frame stream's first convolution.
enum class Variant { Single, AF, CF, EF };

inline const char* to_string(Variant v) {
  switch (v) {
    case Variant::Single: return "SINGLE";
    case Variant::AF: return "AF";
    case Variant::CF: return "CF";
    case Variant::EF: return "EF";
  }
  return "?";
}

inline Variant parse_variant(std::string s) {
  for (auto& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  if (s == "SINGLE" || s == "1-IN") return Variant::Single;
  if (s == "AF") return Variant::AF;
  if (s == "CF") return Variant::CF;
  if (s == "EF") return Variant::EF;
  throw ConfigError("unknown architecture variant '" + s + "' (expected single, af, cf or ef)");
}

struct ArchConfig {
  Variant variant = Variant::AF;
  std::size_t num_res_blocks = 2;
  std::size_t channels = 64;
  std::size_t kernel = 3;
  bool global_skip = true;
  MaskKind mask_kind = MaskKind::Mean;

  bool uses_mask() const { return variant != Variant::Single; }

  friend bool operator==(const ArchConfig& a, const ArchConfig& b) {
    return a.variant == b.variant && a.num_res_blocks == b.num_res_blocks && a.channels == b.channels &&
           a.kernel == b.kernel && a.global_skip == b.global_skip &&
           (!a.uses_mask() || a.mask_kind == b.mask_kind);
  }
};

inline void validate(const ArchConfig& arch) {
  if (arch.num_res_blocks == 0) throw ConfigError("num_res_blocks must be positive");
  if (arch.channels == 0) throw ConfigError("channels must be positive");
  if (arch.kernel == 0 || arch.kernel % 2 == 0) throw ConfigError("kernel must be odd and positive");
}

}  // namespace pgen
