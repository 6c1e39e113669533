#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace tbgen {

using BigUint = boost::multiprecision::cpp_int;

/// Width-exact unsigned signal value.
///
/// Bit index i carries significance 2^i, following Verilog: for a 4-bit
/// value written "1000", bit 3 is 1 and bit 0 is 0. The textual form is
/// always MSB-first. Widths above 64 bits are supported.
class BitVector {
 public:
  /// Throws WidthError if width is 0 or value does not fit in width bits.
  BitVector(unsigned width, BigUint value);

  static BitVector from_uint(unsigned width, std::uint64_t value) {
    return BitVector(width, BigUint(value));
  }
  static BitVector zero(unsigned width) { return BitVector(width, BigUint(0)); }

  unsigned width() const noexcept { return width_; }
  const BigUint& value() const noexcept { return value_; }

  bool bit(unsigned index) const;

  /// The value as a machine integer, when width <= 64.
  std::optional<std::uint64_t> to_u64() const;

  /// 32-bit words, least significant first, ceil(width / 32) of them.
  std::vector<std::uint32_t> words32() const;

  friend bool operator==(const BitVector& a, const BitVector& b) {
    return a.width_ == b.width_ && a.value_ == b.value_;
  }

 private:
  unsigned width_;
  BigUint value_;
};

/// Accepts either exactly `width` binary digits or a sized Verilog literal
/// such as 4'b1000 (underscores allowed in the literal form).
/// Throws WidthError on a length/size mismatch and FormatError on anything
/// that is not binary.
BitVector parse_bitvector(std::string_view text, unsigned width);

/// MSB-first binary string of exactly bv.width() characters.
std::string format_bitvector(const BitVector& bv);

/// Unsigned decimal rendering.
std::string to_decimal(const BitVector& bv);

}  // namespace tbgen
