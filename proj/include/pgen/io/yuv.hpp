#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "pgen/codec/frame.hpp"
#include "pgen/common/error.hpp"

namespace pgen::io {

// Bytes of one 8-bit 4:2:0 planar frame.
inline std::uint64_t yuv420_frame_bytes(std::size_t width, std::size_t height) {
  return static_cast<std::uint64_t>(width) * height + 2 * static_cast<std::uint64_t>((width + 1) / 2) * ((height + 1) / 2);
}

inline std::uint64_t file_size(const std::string& path) {
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (ec) throw DataError("cannot stat '" + path + "': " + ec.message());
  return size;
}

// Reads the Y plane of frame `index`, skipping chroma, and crops it to
// multiples of min_cu (0 disables cropping).
inline FrameY read_yuv_frame(const std::string& path, std::size_t width, std::size_t height, std::size_t index,
                             std::size_t min_cu = 8) {
  if (width == 0 || height == 0) throw ConfigError("read_yuv_frame: width and height must be positive");
  const std::uint64_t frame_bytes = yuv420_frame_bytes(width, height);
  const std::uint64_t needed = frame_bytes * (index + 1);
  const std::uint64_t actual = file_size(path);
  if (actual < needed)
    throw BoundsError("'" + path + "': frame " + std::to_string(index) + " needs " + std::to_string(needed) +
                      " bytes, file has " + std::to_string(actual));
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  in.seekg(static_cast<std::streamoff>(frame_bytes * index));
  FrameY f(width, height);
  if (!in.read(reinterpret_cast<char*>(f.pixels.data()), static_cast<std::streamsize>(f.pixels.size())))
    throw BoundsError("'" + path + "': short read of frame " + std::to_string(index));
  return min_cu > 0 ? crop_to_multiple(f, min_cu) : f;
}

inline std::size_t yuv_frame_count(const std::string& path, std::size_t width, std::size_t height) {
  return static_cast<std::size_t>(file_size(path) / yuv420_frame_bytes(width, height));
}

// Writes frames as 4:2:0 planar with neutral (128) chroma.
inline void write_yuv(const std::string& path, const std::vector<FrameY>& frames, bool append = false) {
  std::ofstream out(path, std::ios::binary | (append ? std::ios::app : std::ios::trunc));
  if (!out) throw DataError("cannot write '" + path + "'");
  for (const FrameY& f : frames) {
    out.write(reinterpret_cast<const char*>(f.pixels.data()), static_cast<std::streamsize>(f.pixels.size()));
    const std::vector<char> chroma(static_cast<std::size_t>(yuv420_frame_bytes(f.width, f.height) - f.pixels.size()),
                                   static_cast<char>(128));
    out.write(chroma.data(), static_cast<std::streamsize>(chroma.size()));
  }
  if (!out) throw DataError("write to '" + path + "' failed");
}

inline void write_yuv_frame(const std::string& path, const FrameY& frame, bool append = false) {
  write_yuv(path, {frame}, append);
}

}  // namespace pgen::io
