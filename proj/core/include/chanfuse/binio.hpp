// core/include/chanfuse/binio.hpp

// Copyright 2026  Chanfuse Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef CHANFUSE_BINIO_HPP_
#define CHANFUSE_BINIO_HPP_

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

// Little-endian binary I/O, independent of host byte order. All container
// formats ("CFB1", "CGM1", "CAE1") are written through these helpers.
namespace chanfuse::binio {

inline void write_u8(std::ostream& os, std::uint8_t v) {
  os.put(static_cast<char>(v));
}

inline void write_u16(std::ostream& os, std::uint16_t v) {
  char buf[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
  os.write(buf, 2);
}

inline void write_u32(std::ostream& os, std::uint32_t v) {
  char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(buf, 4);
}

inline void write_f32(std::ostream& os, float v) {
  write_u32(os, std::bit_cast<std::uint32_t>(v));
}

inline void write_u64(std::ostream& os, std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(buf, 8);
}

inline void write_f64(std::ostream& os, double v) {
  write_u64(os, std::bit_cast<std::uint64_t>(v));
}

inline std::uint8_t read_u8(std::istream& is) {
  int c = is.get();
  if (c == std::istream::traits_type::eof()) throw std::runtime_error("unexpected end of file");
  return static_cast<std::uint8_t>(c);
}

inline std::uint16_t read_u16(std::istream& is) {
  char buf[2];
  if (!is.read(buf, 2)) throw std::runtime_error("unexpected end of file");
  return static_cast<std::uint16_t>(static_cast<std::uint8_t>(buf[0]) |
                                    (static_cast<std::uint16_t>(static_cast<std::uint8_t>(buf[1])) << 8));
}

inline std::uint32_t read_u32(std::istream& is) {
  char buf[4];
  if (!is.read(buf, 4)) throw std::runtime_error("unexpected end of file");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(buf[i])) << (8 * i);
  return v;
}

inline std::uint64_t read_u64(std::istream& is) {
  char buf[8];
  if (!is.read(buf, 8)) throw std::runtime_error("unexpected end of file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(buf[i])) << (8 * i);
  return v;
}

inline float read_f32(std::istream& is) { return std::bit_cast<float>(read_u32(is)); }

inline double read_f64(std::istream& is) { return std::bit_cast<double>(read_u64(is)); }

inline void write_magic(std::ostream& os, const char* magic) {
  os.write(magic, 4);
}

inline void expect_magic(std::istream& is, const char* magic) {
  char buf[4];
  if (!is.read(buf, 4) || buf[0] != magic[0] || buf[1] != magic[1] || buf[2] != magic[2] ||
      buf[3] != magic[3]) {
    throw std::runtime_error(std::string("bad magic, expected \"") + magic + "\"");
  }
}

}  // namespace chanfuse::binio

#endif  // CHANFUSE_BINIO_HPP_
