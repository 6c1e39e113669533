#include "tbgen/bitvector.hpp"

#include <cctype>

#include "tbgen/errors.hpp"

namespace tbgen {

namespace {

BigUint pow2(unsigned n) {
  BigUint one = 1;
  return one << n;
}

BitVector parse_digits(std::string_view digits, unsigned width, std::string_view original) {
  if (digits.size() != width) {
    throw WidthError("binary value '" + std::string(original) + "' has " +
                     std::to_string(digits.size()) + " digits, expected width " +
                     std::to_string(width));
  }
  BigUint value = 0;
  for (char c : digits) {
    if (c != '0' && c != '1') {
      throw FormatError("non-binary character '" + std::string(1, c) + "' in '" +
                        std::string(original) + "'");
    }
    value <<= 1;
    if (c == '1') value |= 1;
  }
  return BitVector(width, std::move(value));
}

}  // namespace

BitVector::BitVector(unsigned width, BigUint value) : width_(width), value_(std::move(value)) {
  if (width_ == 0) throw WidthError("bit vector width must be positive");
  if (value_ < 0 || value_ >= pow2(width_)) {
    throw WidthError("value does not fit in " + std::to_string(width_) + " bits");
  }
}

bool BitVector::bit(unsigned index) const {
  if (index >= width_) {
    throw WidthError("bit index " + std::to_string(index) + " out of range for width " +
                     std::to_string(width_));
  }
  return boost::multiprecision::bit_test(value_, index);
}

std::optional<std::uint64_t> BitVector::to_u64() const {
  if (width_ > 64) return std::nullopt;
  return value_.convert_to<std::uint64_t>();
}

std::vector<std::uint32_t> BitVector::words32() const {
  std::vector<std::uint32_t> words((width_ + 31) / 32);
  BigUint rest = value_;
  for (auto& w : words) {
    w = static_cast<std::uint32_t>(rest & 0xFFFFFFFFu);
    rest >>= 32;
  }
  return words;
}

BitVector parse_bitvector(std::string_view text, unsigned width) {
  if (width == 0) throw WidthError("bit vector width must be positive");
  auto tick = text.find('\'');
  if (tick == std::string_view::npos) return parse_digits(text, width, text);

  // Sized literal: <size>'b<digits>
  auto size_text = text.substr(0, tick);
  if (size_text.empty()) {
    throw FormatError("unsized literal '" + std::string(text) + "' is not accepted");
  }
  unsigned declared = 0;
  for (char c : size_text) {
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      throw FormatError("bad literal size in '" + std::string(text) + "'");
    }
    declared = declared * 10 + static_cast<unsigned>(c - '0');
  }
  if (tick + 1 >= text.size() || (text[tick + 1] != 'b' && text[tick + 1] != 'B')) {
    throw FormatError("only binary literals are accepted: '" + std::string(text) + "'");
  }
  if (declared != width) {
    throw WidthError("literal '" + std::string(text) + "' is sized " + std::to_string(declared) +
                     ", expected width " + std::to_string(width));
  }
  std::string digits;
  for (char c : text.substr(tick + 2)) {
    if (c != '_') digits.push_back(c);
  }
  return parse_digits(digits, width, text);
}

std::string format_bitvector(const BitVector& bv) {
  std::string out(bv.width(), '0');
  for (unsigned i = 0; i < bv.width(); ++i) {
    if (boost::multiprecision::bit_test(bv.value(), i)) out[bv.width() - 1 - i] = '1';
  }
  return out;
}

std::string to_decimal(const BitVector& bv) { return bv.value().str(); }

}  // namespace tbgen
