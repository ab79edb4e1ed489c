#pragma once

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "pgen/io/binary.hpp"
#include "pgen/network/model.hpp"

namespace pgen::io {

inline constexpr char kCheckpointMagic[4] = {'P', 'M', 'E', 'N'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

inline nlohmann::json arch_to_json(const ArchConfig& arch) {
  return nlohmann::json{{"variant", to_string(arch.variant)},
                        {"num_res_blocks", arch.num_res_blocks},
                        {"channels", arch.channels},
                        {"kernel", arch.kernel},
                        {"global_skip", arch.global_skip},
                        {"mask_kind", to_string(arch.mask_kind)}};
}

inline ArchConfig arch_from_json(const nlohmann::json& j) {
  ArchConfig arch;
  arch.variant = parse_variant(j.at("variant").get<std::string>());
  arch.num_res_blocks = j.at("num_res_blocks").get<std::size_t>();
  arch.channels = j.at("channels").get<std::size_t>();
  arch.kernel = j.at("kernel").get<std::size_t>();
  arch.global_skip = j.at("global_skip").get<bool>();
  arch.mask_kind = parse_mask_kind(j.at("mask_kind").get<std::string>());
  validate(arch);
  return arch;
}

namespace detail {

// Vectors (C, 1, 1, 1) are stored with rank 1.
inline std::vector<std::uint32_t> stored_dims(const Shape& s) {
  if (s.c == 1 && s.h == 1 && s.w == 1) return {static_cast<std::uint32_t>(s.n)};
  return {static_cast<std::uint32_t>(s.n), static_cast<std::uint32_t>(s.c), static_cast<std::uint32_t>(s.h),
          static_cast<std::uint32_t>(s.w)};
}

inline std::string shape_text(const Shape& s) {
  const auto d = stored_dims(s);
  std::string out = "[";
  for (std::size_t i = 0; i < d.size(); ++i) out += (i ? "," : "") + std::to_string(d[i]);
  return out + "]";
}

[[noreturn]] inline void truncated(const std::string& source, const std::string& what) {
  throw CheckpointError(CheckpointError::Kind::Truncated, source + ": truncated checkpoint (" + what + ")");
}

}  // namespace detail

template <typename Real>
void save_checkpoint(std::ostream& out, const Model<Real>& model) {
  out.write(kCheckpointMagic, 4);
  put_u32(out, kCheckpointVersion);
  put_string(out, arch_to_json(model.arch).dump());
  const auto tensors = model.tensors();
  put_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    put_string(out, t.name);
    const auto dims = detail::stored_dims(t.tensor->shape());
    put_u32(out, static_cast<std::uint32_t>(dims.size()));
    for (std::uint32_t d : dims) put_u32(out, d);
    for (std::size_t i = 0; i < t.tensor->size(); ++i) put_f32(out, static_cast<float>((*t.tensor)[i]));
  }
}

template <typename Real>
void save_checkpoint(const std::string& path, const Model<Real>& model) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  save_checkpoint(out, model);
  if (!out) throw DataError("write to '" + path + "' failed");
}

inline Model<float> load_checkpoint(std::istream& in, const std::string& source = "<stream>") {
  char magic[4];
  if (!in.read(magic, 4)) detail::truncated(source, "magic");
  if (std::string(magic, 4) != std::string(kCheckpointMagic, 4))
    throw CheckpointError(CheckpointError::Kind::BadMagic, source + ": not a PMEN checkpoint");
  std::uint32_t version = 0;
  if (!get_u32(in, version)) detail::truncated(source, "version");
  if (version != kCheckpointVersion)
    throw CheckpointError(CheckpointError::Kind::UnsupportedVersion,
                          source + ": unsupported checkpoint version " + std::to_string(version));
  std::string arch_text;
  if (!get_string(in, arch_text)) detail::truncated(source, "architecture descriptor");
  ArchConfig arch;
  try {
    arch = arch_from_json(nlohmann::json::parse(arch_text));
  } catch (const std::exception& e) {
    throw CheckpointError(CheckpointError::Kind::Malformed, source + ": bad architecture descriptor: " + e.what());
  }

  Model<float> model = build_model<float>(arch, 0);
  auto tensors = model.tensors();
  std::uint32_t count = 0;
  if (!get_u32(in, count)) detail::truncated(source, "tensor count");
  if (count != tensors.size())
    throw CheckpointError(CheckpointError::Kind::Malformed, source + ": " + std::to_string(count) +
                                                                " tensors stored, architecture defines " +
                                                                std::to_string(tensors.size()));
  for (auto& t : tensors) {
    std::string name;
    if (!get_string(in, name)) detail::truncated(source, "tensor name");
    if (name != t.name)
      throw CheckpointError(CheckpointError::Kind::Malformed,
                            source + ": expected tensor '" + t.name + "', found '" + name + "'");
    std::uint32_t rank = 0;
    if (!get_u32(in, rank)) detail::truncated(source, "rank of " + name);
    if (rank == 0 || rank > 4) throw CheckpointError(CheckpointError::Kind::Malformed, source + ": bad rank for " + name);
    std::vector<std::uint32_t> dims(rank);
    for (auto& d : dims)
      if (!get_u32(in, d)) detail::truncated(source, "dims of " + name);
    if (dims != detail::stored_dims(t.tensor->shape()))
      throw CheckpointError(CheckpointError::Kind::Malformed, source + ": tensor '" + name + "' has unexpected shape");
    for (std::size_t i = 0; i < t.tensor->size(); ++i)
      if (!get_f32(in, (*t.tensor)[i])) detail::truncated(source, "data of " + name);
  }
  if (in.peek() != std::char_traits<char>::eof())
    throw CheckpointError(CheckpointError::Kind::Malformed, source + ": trailing bytes after last tensor");
  return model;
}

inline Model<float> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return load_checkpoint(in, path);
}

// Rejects a checkpoint whose architecture differs from `expected`, listing
// every parameter whose shape or presence differs.
inline void require_arch(const ArchConfig& stored, const ArchConfig& expected, const std::string& source) {
  if (stored == expected) return;
  std::map<std::string, Shape> a, b;
  for (const auto& t : build_model<float>(stored, 0).tensors()) a[t.name] = t.tensor->shape();
  for (const auto& t : build_model<float>(expected, 0).tensors()) b[t.name] = t.tensor->shape();
  std::ostringstream msg;
  msg << source << ": checkpoint architecture " << arch_to_json(stored).dump() << " does not match requested "
      << arch_to_json(expected).dump() << "; differing parameters:";
  std::size_t listed = 0;
  for (const auto& [name, shape] : b) {
    auto it = a.find(name);
    if (it == a.end()) msg << "\n  " << name << ": missing in checkpoint, expected " << detail::shape_text(shape), ++listed;
    else if (!(it->second == shape))
      msg << "\n  " << name << ": checkpoint " << detail::shape_text(it->second) << ", expected " << detail::shape_text(shape), ++listed;
  }
  for (const auto& [name, shape] : a)
    if (!b.count(name)) msg << "\n  " << name << ": unexpected in checkpoint " << detail::shape_text(shape), ++listed;
  if (listed == 0) msg << " (none; descriptor fields differ)";
  throw CheckpointError(CheckpointError::Kind::ArchMismatch, msg.str());
}

inline Model<float> load_checkpoint(const std::string& path, const ArchConfig& expected) {
  Model<float> m = load_checkpoint(path);
  require_arch(m.arch, expected, path);
  return m;
}

}  // namespace pgen::io
