#pragma once

#include <cctype>
#include <fstream>
#include <sstream>
#include <string>

#include "pgen/codec/frame.hpp"
#include "pgen/common/error.hpp"
#include "pgen/mask.hpp"

namespace pgen::io {

// Binary (P5) 8-bit greymap.
inline void write_pgm(const std::string& path, const FrameY& frame) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "P5\n" << frame.width << ' ' << frame.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.pixels.data()), static_cast<std::streamsize>(frame.pixels.size()));
  if (!out) throw DataError("write to '" + path + "' failed");
}

inline void write_mask_pgm(const std::string& path, const Mask& mask) { write_pgm(path, render_mask(mask)); }

inline FrameY read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  const auto token = [&]() {
    std::string t;
    char c = 0;
    while (in.get(c)) {
      if (c == '#') {
        std::string skip;
        std::getline(in, skip);
      } else if (!std::isspace(static_cast<unsigned char>(c))) {
        t.push_back(c);
        break;
      }
    }
    while (in.get(c) && !std::isspace(static_cast<unsigned char>(c))) t.push_back(c);
    return t;
  };
  if (token() != "P5") throw DataError("'" + path + "' is not a binary PGM");
  std::size_t w = 0, h = 0, maxval = 0;
  try {
    w = std::stoul(token());
    h = std::stoul(token());
    maxval = std::stoul(token());
  } catch (const std::exception&) {
    throw DataError("'" + path + "' has a malformed PGM header");
  }
  if (maxval != 255) throw DataError("'" + path + "': only 8-bit PGM is supported");
  FrameY f(w, h);
  if (!in.read(reinterpret_cast<char*>(f.pixels.data()), static_cast<std::streamsize>(f.pixels.size())))
    throw DataError("'" + path + "': truncated PGM data");
  return f;
}

}  // namespace pgen::io
