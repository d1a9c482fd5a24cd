#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "convext/grid.hpp"

namespace convext {

// Binary grid-function container, little-endian throughout:
//   magic "CVXTGF01" | u32 dim | u32 n | u32 domain | f64 period |
//   2 * n^d f64 (re, im interleaved, row-major)
inline constexpr char kGridFnMagic[8] = {'C', 'V', 'X', 'T', 'G', 'F', '0', '1'};

namespace detail {

template <class T>
void put_raw(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get_raw(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw precondition_error("grid function file: truncated");
  return v;
}

}  // namespace detail

inline void write_gridfn(const std::filesystem::path& path,
                         const GridFunction& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw precondition_error("cannot open for writing: " + path.string());
  os.write(kGridFnMagic, sizeof(kGridFnMagic));
  const Grid& g = f.grid();
  detail::put_raw<std::uint32_t>(os, static_cast<std::uint32_t>(g.dim()));
  detail::put_raw<std::uint32_t>(os, static_cast<std::uint32_t>(g.n()));
  detail::put_raw<std::uint32_t>(os, static_cast<std::uint32_t>(g.domain()));
  detail::put_raw<double>(os, g.period());
  for (std::size_t i = 0; i < f.size(); ++i) {
    detail::put_raw<double>(os, f[i].real());
    detail::put_raw<double>(os, f[i].imag());
  }
  if (!os) throw numeric_error("write failed: " + path.string());
}

inline GridFunction read_gridfn(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw precondition_error("cannot open for reading: " + path.string());
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kGridFnMagic, sizeof(magic)) != 0)
    throw precondition_error("grid function file: bad magic: " + path.string());
  const auto dim = detail::get_raw<std::uint32_t>(is);
  const auto n = detail::get_raw<std::uint32_t>(is);
  const auto dom = detail::get_raw<std::uint32_t>(is);
  const auto period = detail::get_raw<double>(is);
  if (dom > 1) throw precondition_error("grid function file: bad domain tag");
  Grid g = dom == 0 ? Grid::torus(static_cast<int>(dim), static_cast<int>(n))
                    : Grid::windowed(static_cast<int>(dim),
                                     static_cast<int>(n), period);
  GridFunction f(g);
  for (std::size_t i = 0; i < f.size(); ++i) {
    double re = detail::get_raw<double>(is);
    double im = detail::get_raw<double>(is);
    f[i] = {re, im};
  }
  return f;
}

// ---------------------------------------------------------------------------
// CSV (RFC 4180 quoting)
// ---------------------------------------------------------------------------

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string csv_row(const std::vector<std::string>& fields) {
  std::string row;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) row += ',';
    row += csv_field(fields[i]);
  }
  row += "\r\n";
  return row;
}

inline std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// index coordinates per axis, then re and im
inline void write_gridfn_csv(const std::filesystem::path& path,
                             const GridFunction& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw precondition_error("cannot open for writing: " + path.string());
  const Grid& g = f.grid();
  std::vector<std::string> header;
  for (int ax = 0; ax < g.dim(); ++ax) header.push_back("i" + std::to_string(ax));
  header.push_back("re");
  header.push_back("im");
  os << csv_row(header);
  std::vector<int> idx(g.dim());
  for (std::size_t i = 0; i < f.size(); ++i) {
    g.unflatten(i, idx);
    std::vector<std::string> row;
    for (int ax = 0; ax < g.dim(); ++ax) row.push_back(std::to_string(idx[ax]));
    row.push_back(format_double(f[i].real()));
    row.push_back(format_double(f[i].imag()));
    os << csv_row(row);
  }
}

}  // namespace convext
