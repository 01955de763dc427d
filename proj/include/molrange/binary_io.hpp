//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "molrange/error.hpp"

// Little-endian scalar I/O shared by the dataset cache and checkpoints.
namespace molrange::io {

template <class U>
void write_le(std::ostream &os, U value) {
  unsigned char bytes[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i)
    bytes[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xFF);
  os.write(reinterpret_cast<const char *>(bytes), sizeof(U));
}

template <class U>
U read_le(std::istream &is) {
  unsigned char bytes[sizeof(U)];
  is.read(reinterpret_cast<char *>(bytes), sizeof(U));
  if (!is)
    throw Error(ErrorKind::kFormat, "unexpected end of binary stream");
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i)
    value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

inline void write_u8(std::ostream &os, std::uint8_t v) { write_le(os, v); }
inline void write_u32(std::ostream &os, std::uint32_t v) { write_le(os, v); }
inline void write_u64(std::ostream &os, std::uint64_t v) { write_le(os, v); }
inline void write_i32(std::ostream &os, std::int32_t v) {
  write_le(os, static_cast<std::uint32_t>(v));
}
inline void write_f32(std::ostream &os, float v) {
  write_le(os, std::bit_cast<std::uint32_t>(v));
}
inline void write_f64(std::ostream &os, double v) {
  write_le(os, std::bit_cast<std::uint64_t>(v));
}
inline void write_string(std::ostream &os, const std::string &s) {
  write_u32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::uint8_t read_u8(std::istream &is) { return read_le<std::uint8_t>(is); }
inline std::uint32_t read_u32(std::istream &is) { return read_le<std::uint32_t>(is); }
inline std::uint64_t read_u64(std::istream &is) { return read_le<std::uint64_t>(is); }
inline std::int32_t read_i32(std::istream &is) {
  return static_cast<std::int32_t>(read_le<std::uint32_t>(is));
}
inline float read_f32(std::istream &is) {
  return std::bit_cast<float>(read_le<std::uint32_t>(is));
}
inline double read_f64(std::istream &is) {
  return std::bit_cast<double>(read_le<std::uint64_t>(is));
}
inline std::string read_string(std::istream &is) {
  const std::uint32_t n = read_u32(is);
  std::string s(n, '\0');
  is.read(s.data(), n);
  if (!is)
    throw Error(ErrorKind::kFormat, "truncated string");
  return s;
}

}  // namespace molrange::io
