#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <utility>

#include "fvl/common/error.hpp"

// Little-endian primitives for the binary file formats, independent of host
// byte order.
namespace fvl::binary {

template <typename UInt>
void write_le(std::ostream& out, UInt value) {
  unsigned char bytes[sizeof(UInt)];
  for (std::size_t i = 0; i < sizeof(UInt); ++i) bytes[i] = static_cast<unsigned char>(value >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(UInt));
}

inline void write_f64(std::ostream& out, double v) { write_le(out, std::bit_cast<std::uint64_t>(v)); }
inline void write_f32(std::ostream& out, float v) { write_le(out, std::bit_cast<std::uint32_t>(v)); }

// Reads sequential fields and reports the byte offset of a short read.
class Reader {
 public:
  Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  template <typename UInt>
  UInt read_le(const char* what) {
    unsigned char bytes[sizeof(UInt)];
    read_bytes(bytes, sizeof(UInt), what);
    UInt value = 0;
    for (std::size_t i = 0; i < sizeof(UInt); ++i) value |= static_cast<UInt>(bytes[i]) << (8 * i);
    return value;
  }

  double read_f64(const char* what) { return std::bit_cast<double>(read_le<std::uint64_t>(what)); }
  float read_f32(const char* what) { return std::bit_cast<float>(read_le<std::uint32_t>(what)); }

  void read_bytes(void* dst, std::size_t n, const char* what) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) fail(std::string("truncated while reading ") + what);
    offset_ += n;
  }

  void expect_magic(const char (&magic)[5]) {
    char got[4];
    read_bytes(got, 4, "magic");
    if (std::memcmp(got, magic, 4) != 0) {
      offset_ -= 4;
      fail(std::string("bad magic, expected \"") + magic + "\"");
    }
  }

  void expect_end() {
    if (in_.peek() != std::char_traits<char>::eof()) fail("trailing bytes after payload");
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw FormatError(source_ + " at offset " + std::to_string(offset_) + ": " + message);
  }

  std::size_t offset() const { return offset_; }

 private:
  std::istream& in_;
  std::string source_;
  std::size_t offset_ = 0;
};

}  // namespace fvl::binary
