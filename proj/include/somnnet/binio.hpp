#pragma once

#include <bit>
#include <cstdint>
#include <string>

#include "somnnet/error.hpp"

// Explicit little-endian encode/decode so files are identical across hosts.
namespace somnnet::bin {

inline void put_u8(std::string& b, uint8_t v) {
  b.push_back(static_cast<char>(v));
}

inline void put_u16(std::string& b, uint16_t v) {
  put_u8(b, static_cast<uint8_t>(v & 0xff));
  put_u8(b, static_cast<uint8_t>(v >> 8));
}

inline void put_u32(std::string& b, uint32_t v) {
  for (int i = 0; i < 4; ++i)
    put_u8(b, static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

inline void put_u64(std::string& b, uint64_t v) {
  for (int i = 0; i < 8; ++i)
    put_u8(b, static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

inline void put_f32(std::string& b, float v) {
  put_u32(b, std::bit_cast<uint32_t>(v));
}

inline void put_f64(std::string& b, double v) {
  put_u64(b, std::bit_cast<uint64_t>(v));
}

struct Reader {
  const std::string& buf;
  size_t off = 0;

  explicit Reader(const std::string& b) : buf(b) {}

  void need(size_t n) const {
    if (off + n > buf.size())
      throw ParseError("truncated binary data at byte " + std::to_string(off));
  }

  uint8_t u8() {
    need(1);
    return static_cast<uint8_t>(buf[off++]);
  }

  uint16_t u16() {
    uint16_t v = u8();
    v |= static_cast<uint16_t>(u8()) << 8;
    return v;
  }

  uint32_t u32() {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(u8()) << (8 * i);
    return v;
  }

  uint64_t u64() {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(u8()) << (8 * i);
    return v;
  }

  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }

  std::string bytes(size_t n) {
    need(n);
    std::string s = buf.substr(off, n);
    off += n;
    return s;
  }

  bool done() const { return off == buf.size(); }
};

// Whole-file helpers; both throw IoError with the path on failure.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

}  // namespace somnnet::bin
