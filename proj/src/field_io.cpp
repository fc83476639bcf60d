#include "kslab/field_io.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <ostream>
#include <istream>

#include "kslab/errors.hpp"

namespace kslab {

namespace {


template <class T>
void put_le(std::ostream& os, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
bool get_le(std::istream& is, T& value) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) return false;
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  std::memcpy(&value, bytes, sizeof(T));
  return true;
}

}  // namespace

void write_snapshot(std::ostream& os, const Field& f) {
  const Grid& g = f.grid();
  os.write("KSF1", 4);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.dim()));
  for (int a = 0; a < 3; ++a) put_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.count(a)));
  for (double v : f.values()) put_le<double>(os, v);
  if (!os) throw FormatError("failed writing snapshot");
}

void write_snapshot(const std::filesystem::path& path, const Field& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open " + path.string() + " for writing");
  write_snapshot(os, f);
}

Field read_snapshot(std::istream& is, std::span<const double> lengths) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "KSF1", 4) != 0) throw FormatError("bad snapshot magic");
  std::uint32_t dim = 0;
  std::uint32_t n[3];
  if (!get_le(is, dim)) throw FormatError("truncated snapshot header");
  for (auto& c : n)
    if (!get_le(is, c)) throw FormatError("truncated snapshot header");
  if (dim < 1 || dim > 3) throw FormatError("snapshot dim must be 1, 2 or 3");
  for (std::uint32_t a = 0; a < 3; ++a) {
    if (a < dim && n[a] < 2) throw FormatError("snapshot axis count below 2");
    if (a >= dim && n[a] != 1) throw FormatError("unused snapshot axis must have count 1");
  }
  if (lengths.size() != dim) throw FormatError("snapshot dim does not match supplied lengths");
  int counts[3] = {static_cast<int>(n[0]), static_cast<int>(n[1]), static_cast<int>(n[2])};
  Grid grid(static_cast<int>(dim), lengths, std::span<const int>(counts, dim));
  std::vector<double> values(grid.size());
  for (auto& v : values)
    if (!get_le(is, v)) throw FormatError("truncated snapshot data");
  if (is.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after snapshot data");
  return Field(grid, std::move(values));
}

Field read_snapshot(const std::filesystem::path& path, std::span<const double> lengths) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path.string());
  return read_snapshot(is, lengths);
}

void write_field_csv(std::ostream& os, const Field& f) {
  static const char* names[3] = {"x", "y", "z"};
  const Grid& g = f.grid();
  for (int a = 0; a < g.dim(); ++a) os << names[a] << ',';
  os << "value\n";
  char buf[64];
  for (std::size_t c = 0; c < f.size(); ++c) {
    const auto x = g.center(c);
    for (int a = 0; a < g.dim(); ++a) {
      std::snprintf(buf, sizeof buf, "%.17g,", x[a]);
      os << buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g\n", f[c]);
    os << buf;
  }
}

void write_field_csv(const std::filesystem::path& path, const Field& f) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open " + path.string() + " for writing");
  write_field_csv(os, f);
}

}  // namespace kslab
