#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

namespace pgen::io {

// Fixed little-endian encoding regardless of host byte order.
inline void put_u32(std::ostream& os, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  os.write(b, 4);
}

inline void put_f32(std::ostream& os, float v) { put_u32(os, std::bit_cast<std::uint32_t>(v)); }

inline void put_string(std::ostream& os, const std::string& s) {
  put_u32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

// Returns false on a short read.
inline bool get_u32(std::istream& is, std::uint32_t& v) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) return false;
  v = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
      (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  return true;
}

inline bool get_f32(std::istream& is, float& v) {
  std::uint32_t bits = 0;
  if (!get_u32(is, bits)) return false;
  v = std::bit_cast<float>(bits);
  return true;
}

inline bool get_string(std::istream& is, std::string& s, std::uint32_t max_len = 1u << 24) {
  std::uint32_t n = 0;
  if (!get_u32(is, n) || n > max_len) return false;
  s.resize(n);
  return static_cast<bool>(is.read(s.data(), n));
}

}  // namespace pgen::io
