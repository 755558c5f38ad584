#pragma once

// Field snapshots: a data file plus a sidecar text header `<path>.hdr`
//
//   dim = 2
//   cells = 32 32
//   extents = 1 1
//   format = binary | csv
//
// Binary data is the raw little-endian IEEE-754 doubles in lexicographic node
// order (last axis fastest). CSV holds one value per line in the same order,
// printed with 17 significant digits.

#include <bit>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "chtx/error.hpp"
#include "chtx/field.hpp"
#include "chtx/grid.hpp"

namespace chtx {

static_assert(std::endian::native == std::endian::little, "snapshot format assumes little-endian doubles");

enum class SnapshotFormat { Binary, Csv };

namespace detail {

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <class T>
std::vector<T> parse_list(const std::string& text, const std::string& what) {
  std::string normalized = text;
  for (char& c : normalized) {
    if (c == ',' || c == 'x') c = ' ';
  }
  std::istringstream in(normalized);
  std::vector<T> out;
  T value;
  while (in >> value) out.push_back(value);
  if (!in.eof()) fail(ErrorCode::ConfigParse, "cannot parse list for " + what + ": '" + text + "'");
  return out;
}

inline void write_raw(std::ostream& out, std::span<const double> values) {
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
}

inline std::vector<double> read_raw(std::istream& in, std::size_t count, const std::string& what) {
  std::vector<double> values(count);
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(count * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != count * sizeof(double)) {
    fail(ErrorCode::Io, "truncated binary data in " + what);
  }
  return values;
}

}  // namespace detail

inline std::string grid_header_lines(const Grid& grid) {
  std::string s = "dim = " + std::to_string(grid.dim()) + "\ncells =";
  for (int k = 0; k < grid.dim(); ++k) s += " " + std::to_string(grid.cells(k));
  s += "\nextents =";
  for (int k = 0; k < grid.dim(); ++k) s += " " + detail::format_double(grid.extent(k));
  return s + "\n";
}

inline void write_field(const std::string& path, const ScalarField& field,
                        SnapshotFormat format = SnapshotFormat::Binary) {
  {
    std::ofstream hdr(path + ".hdr");
    if (!hdr) fail(ErrorCode::Io, "cannot write " + path + ".hdr");
    hdr << grid_header_lines(field.grid())
        << "format = " << (format == SnapshotFormat::Binary ? "binary" : "csv") << "\n";
  }
  if (format == SnapshotFormat::Binary) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write " + path);
    detail::write_raw(out, field.values());
  } else {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) fail(ErrorCode::Io, "cannot write " + path);
    for (double x : field.values()) std::fprintf(f, "%.17g\n", x);
    std::fclose(f);
  }
}

inline ScalarField read_field(const std::string& path) {
  std::ifstream hdr(path + ".hdr");
  if (!hdr) fail(ErrorCode::Io, "cannot read sidecar header " + path + ".hdr");
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(hdr, line)) {
    line = detail::trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorCode::Io, "malformed header line in " + path + ".hdr: " + line);
    kv[detail::trim(line.substr(0, eq))] = detail::trim(line.substr(eq + 1));
  }
  for (const char* key : {"dim", "cells", "extents"}) {
    if (!kv.count(key)) fail(ErrorCode::Io, std::string("header missing key ") + key + " in " + path + ".hdr");
  }
  const auto cells = detail::parse_list<int>(kv["cells"], "cells");
  const auto extents = detail::parse_list<double>(kv["extents"], "extents");
  if (static_cast<int>(cells.size()) != std::stoi(kv["dim"])) {
    fail(ErrorCode::Io, "header dim does not match cells in " + path + ".hdr");
  }
  auto grid = Grid::make(cells, extents);
  const std::string format = kv.count("format") ? kv["format"] : "binary";
  if (format == "binary") {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot read " + path);
    auto values = detail::read_raw(in, grid->size(), path);
    return ScalarField(grid, std::move(values));
  }
  if (format != "csv") fail(ErrorCode::Io, "unknown snapshot format '" + format + "'");
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot read " + path);
  std::vector<double> values;
  values.reserve(grid->size());
  while (std::getline(in, line)) {
    line = detail::trim(line);
    if (line.empty()) continue;
    values.push_back(std::strtod(line.c_str(), nullptr));
  }
  return ScalarField(grid, std::move(values));
}

}  // namespace chtx
