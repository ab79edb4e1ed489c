#pragma once

#include <cstdint>
#include <fstream>
#include <string>

#include "pgen/io/binary.hpp"
#include "pgen/training/dataset.hpp"

namespace pgen::io {

// Binary patch store:
//   "PPST", u32 version, u32 patch_size, u32 qp, u32 mask_kind, u32 has_masks, u32 count,
//   then per patch: u32 clip, frame, x, y; distorted bytes; target bytes; mask f32 (if has_masks).
inline constexpr std::uint32_t kPatchStoreVersion = 1;

inline void save_dataset(const std::string& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  out.write("PPST", 4);
  put_u32(out, kPatchStoreVersion);
  put_u32(out, static_cast<std::uint32_t>(ds.patch_size));
  put_u32(out, static_cast<std::uint32_t>(ds.qp));
  put_u32(out, ds.mask_kind == MaskKind::Mean ? 0u : 1u);
  put_u32(out, ds.has_masks ? 1u : 0u);
  put_u32(out, static_cast<std::uint32_t>(ds.patches.size()));
  for (const PatchPair& p : ds.patches) {
    put_u32(out, p.clip);
    put_u32(out, p.frame);
    put_u32(out, p.x);
    put_u32(out, p.y);
    out.write(reinterpret_cast<const char*>(p.distorted.data()), static_cast<std::streamsize>(p.distorted.size()));
    out.write(reinterpret_cast<const char*>(p.target.data()), static_cast<std::streamsize>(p.target.size()));
    if (ds.has_masks)
      for (float v : p.mask) put_f32(out, v);
  }
  if (!out) throw DataError("write to '" + path + "' failed");
}

inline Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  const auto fail = [&](const std::string& what) -> void { throw DataError("'" + path + "': " + what); };
  char magic[4];
  if (!in.read(magic, 4) || std::string(magic, 4) != "PPST") fail("not a patch store");
  std::uint32_t version = 0, size = 0, qp = 0, kind = 0, has_masks = 0, count = 0;
  if (!get_u32(in, version) || version != kPatchStoreVersion) fail("unsupported patch store version");
  if (!get_u32(in, size) || !get_u32(in, qp) || !get_u32(in, kind) || !get_u32(in, has_masks) || !get_u32(in, count))
    fail("truncated header");
  if (size == 0 || size > 4096 || kind > 1) fail("bad header values");
  Dataset ds;
  ds.patch_size = size;
  ds.qp = static_cast<int>(qp);
  ds.mask_kind = kind == 0 ? MaskKind::Mean : MaskKind::Boundary;
  ds.has_masks = has_masks != 0;
  ds.patches.resize(count);
  const std::size_t area = static_cast<std::size_t>(size) * size;
  for (PatchPair& p : ds.patches) {
    p.qp = ds.qp;
    p.distorted.resize(area);
    p.target.resize(area);
    if (!get_u32(in, p.clip) || !get_u32(in, p.frame) || !get_u32(in, p.x) || !get_u32(in, p.y) ||
        !in.read(reinterpret_cast<char*>(p.distorted.data()), static_cast<std::streamsize>(area)) ||
        !in.read(reinterpret_cast<char*>(p.target.data()), static_cast<std::streamsize>(area)))
      fail("truncated patch data");
    if (ds.has_masks) {
      p.mask.resize(area);
      for (float& v : p.mask)
        if (!get_f32(in, v)) fail("truncated mask data");
    }
  }
  return ds;
}

}  // namespace pgen::io
