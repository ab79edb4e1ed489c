#pragma once

#include <json.hpp>

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "pgen/io/yuv.hpp"

namespace pgen::io {

struct ManifestEntry {
  std::string path;  // as written; see DatasetManifest::resolve
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t frame_count = 0;
  std::string name;  // sequence label, defaults to the file stem
  std::string cls;   // optional class label for reports
};

// JSON list of raw 8-bit 4:2:0 clips:
//   {"format": "yuv420p8", "entries": [{"path", "width", "height", "frame_count", "name"?, "class"?}]}
struct DatasetManifest {
  std::string format = "yuv420p8";
  std::vector<ManifestEntry> entries;
  std::filesystem::path base_dir;  // relative entry paths resolve against this

  std::string resolve(const ManifestEntry& e) const {
    const std::filesystem::path p(e.path);
    return (p.is_absolute() || base_dir.empty() ? p : base_dir / p).string();
  }
};

// Throws DataError if the clip is missing or shorter than frame_count frames.
inline void check_entry(const DatasetManifest& m, const ManifestEntry& e) {
  const std::string path = m.resolve(e);
  if (!std::filesystem::exists(path)) throw DataError("clip '" + path + "' does not exist");
  const std::uint64_t need = yuv420_frame_bytes(e.width, e.height) * e.frame_count;
  const std::uint64_t have = file_size(path);
  if (have < need)
    throw DataError("clip '" + path + "' holds " + std::to_string(have) + " bytes, " + std::to_string(e.frame_count) +
                    " frames of " + dims_string(e.width, e.height) + " need " + std::to_string(need));
}

inline nlohmann::json manifest_to_json(const DatasetManifest& m) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : m.entries)
    entries.push_back({{"path", e.path},
                       {"width", e.width},
                       {"height", e.height},
                       {"frame_count", e.frame_count},
                       {"name", e.name},
                       {"class", e.cls}});
  return {{"format", m.format}, {"entries", entries}};
}

inline DatasetManifest manifest_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  DatasetManifest m;
  m.base_dir = base_dir;
  m.format = j.value("format", std::string("yuv420p8"));
  if (m.format != "yuv420p8")
    throw DataError("manifest format '" + m.format + "' is not supported (only yuv420p8)");
  for (const auto& je : j.at("entries")) {
    ManifestEntry e;
    e.path = je.at("path").get<std::string>();
    e.width = je.at("width").get<std::size_t>();
    e.height = je.at("height").get<std::size_t>();
    e.frame_count = je.at("frame_count").get<std::size_t>();
    e.name = je.value("name", std::filesystem::path(e.path).stem().string());
    e.cls = je.value("class", std::string());
    if (e.width == 0 || e.height == 0 || e.frame_count == 0)
      throw DataError("manifest entry '" + e.path + "' has zero width, height or frame_count");
    m.entries.push_back(std::move(e));
  }
  return m;
}

inline DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest '" + path + "'");
  try {
    const std::filesystem::path dir = std::filesystem::path(path).parent_path();
    return manifest_from_json(nlohmann::json::parse(in), dir.empty() ? std::filesystem::path(".") : dir);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("manifest '" + path + "': " + e.what());
  }
}

// Relative entry paths of a loaded manifest are rewritten against the new
// file's directory, so it resolves to the same clips wherever it is written.
// Without a base_dir, relative paths are taken as relative to the new file.
inline void save_manifest(const std::string& path, const DatasetManifest& m) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::absolute(fs::path(path).parent_path()).lexically_normal();
  DatasetManifest rebased = m;
  for (auto& e : rebased.entries) {
    if (m.base_dir.empty() || fs::path(e.path).is_absolute()) continue;
    const fs::path clip = fs::absolute(m.resolve(e)).lexically_normal();
    const fs::path rel = clip.lexically_relative(dir);
    e.path = (rel.empty() ? clip : rel).generic_string();
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << manifest_to_json(rebased).dump(2) << '\n';
}

}  // namespace pgen::io
