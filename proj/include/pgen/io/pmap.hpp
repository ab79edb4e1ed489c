#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "pgen/codec/partition_map.hpp"
#include "pgen/common/error.hpp"

namespace pgen::io {

// Text format:
//   PMAP 1 <width> <height> <ctu> <min_cu>
//   <x> <y> <size>        one line per leaf, ascending (y, x)
inline void write_partition_map(std::ostream& out, const PartitionMap& map) {
  PartitionMap sorted = map;
  sorted.sort_leaves();
  out << "PMAP 1 " << map.width << ' ' << map.height << ' ' << map.ctu_size << ' ' << map.min_cu << '\n';
  for (const Leaf& l : sorted.leaves) out << l.x << ' ' << l.y << ' ' << l.size << '\n';
}

inline void write_partition_map(const std::string& path, const PartitionMap& map) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  write_partition_map(out, map);
  if (!out) throw DataError("write to '" + path + "' failed");
}

// Parses and re-validates the tiling invariants.
inline PartitionMap read_partition_map(std::istream& in, const std::string& source = "<stream>") {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(source + ": empty partition map");
  std::istringstream header(line);
  std::string magic;
  int version = 0;
  PartitionMap map;
  if (!(header >> magic >> version >> map.width >> map.height >> map.ctu_size >> map.min_cu) || magic != "PMAP")
    throw ValidationError(source + ": malformed header '" + line + "'");
  if (version != 1) throw ValidationError(source + ": unsupported PMAP version " + std::to_string(version));
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream row(line);
    Leaf l;
    std::string extra;
    if (!(row >> l.x >> l.y >> l.size) || (row >> extra))
      throw ValidationError(source + ":" + std::to_string(line_no) + ": expected 'x y size', got '" + line + "'");
    map.leaves.push_back(l);
  }
  validate(map);
  map.sort_leaves();
  return map;
}

inline PartitionMap read_partition_map(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_partition_map(in, path);
}

}  // namespace pgen::io
