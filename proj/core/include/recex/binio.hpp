#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "recex/errors.hpp"
#include "recex/matrix.hpp"

namespace recex::binio {

static_assert(std::endian::native == std::endian::little,
              "checkpoint formats assume a little-endian host");

inline void write_u32(std::ostream& os, uint32_t x) {
  os.write(reinterpret_cast<const char*>(&x), sizeof(x));
}
inline void write_u64(std::ostream& os, uint64_t x) {
  os.write(reinterpret_cast<const char*>(&x), sizeof(x));
}
inline void write_doubles(std::ostream& os, std::span<const double> v) {
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size() * sizeof(double)));
}
inline void write_string(std::ostream& os, const std::string& s) {
  write_u64(os, s.size());
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}
inline void write_matrix(std::ostream& os, const DenseMatrix& m) {
  write_u64(os, m.rows);
  write_u64(os, m.cols);
  write_doubles(os, m.v);
}

inline uint32_t read_u32(std::istream& is) {
  uint32_t x = 0;
  is.read(reinterpret_cast<char*>(&x), sizeof(x));
  if (!is) throw DataError("checkpoint: truncated file");
  return x;
}
inline uint64_t read_u64(std::istream& is) {
  uint64_t x = 0;
  is.read(reinterpret_cast<char*>(&x), sizeof(x));
  if (!is) throw DataError("checkpoint: truncated file");
  return x;
}
inline void read_doubles(std::istream& is, std::span<double> v) {
  is.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!is) throw DataError("checkpoint: truncated file");
}
inline std::string read_string(std::istream& is) {
  const uint64_t n = read_u64(is);
  if (n > (1ull << 32)) throw DataError("checkpoint: implausible string length");
  std::string s(n, '\0');
  is.read(s.data(), static_cast<std::streamsize>(n));
  if (!is) throw DataError("checkpoint: truncated file");
  return s;
}
inline DenseMatrix read_matrix(std::istream& is) {
  const uint64_t r = read_u64(is);
  const uint64_t c = read_u64(is);
  if (r * c > (1ull << 34)) throw DataError("checkpoint: implausible matrix size");
  DenseMatrix m(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
  read_doubles(is, m.v);
  return m;
}

inline void expect_magic(std::istream& is, const char (&magic)[5]) {
  char buf[4];
  is.read(buf, 4);
  if (!is || std::memcmp(buf, magic, 4) != 0)
    throw DataError(std::string("checkpoint: bad magic, expected ") + magic);
}

}  // namespace recex::binio
