#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pgen/codec/codec.hpp"
#include "pgen/common/error.hpp"

namespace pgen::io {

// Fixed-precision number formatting so reports are byte-stable.
inline std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

struct RDRow {
  int qp = 0;
  RDPoint point;
};

// Schema: header `qp,rate_bits,psnr_db`, one row per QP.
inline void write_rd_csv(std::ostream& out, const std::vector<RDRow>& rows) {
  out << "qp,rate_bits,psnr_db\n";
  for (const auto& r : rows) out << r.qp << ',' << fixed(r.point.rate, 0) << ',' << fixed(r.point.psnr) << '\n';
}

inline void write_rd_csv(const std::string& path, const std::vector<RDRow>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  write_rd_csv(out, rows);
}

inline std::vector<RDRow> read_rd_csv(std::istream& in, const std::string& source = "<stream>") {
  std::string line;
  if (!std::getline(in, line)) throw DataError(source + ": empty RD file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "qp,rate_bits,psnr_db") throw DataError(source + ": expected header 'qp,rate_bits,psnr_db'");
  std::vector<RDRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string qp, rate, psnr;
    if (!std::getline(row, qp, ',') || !std::getline(row, rate, ',') || !std::getline(row, psnr))
      throw DataError(source + ":" + std::to_string(line_no) + ": expected 3 columns");
    try {
      rows.push_back({std::stoi(qp), {std::stod(rate), std::stod(psnr)}});
    } catch (const std::exception&) {
      throw DataError(source + ":" + std::to_string(line_no) + ": non-numeric field in '" + line + "'");
    }
  }
  return rows;
}

inline std::vector<RDRow> read_rd_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_rd_csv(in, path);
}

}  // namespace pgen::io
