#include "canids/biguint.hpp"

#include <algorithm>
#include <cmath>

#include "canids/error.hpp"

namespace canids {

BigUint::BigUint(std::uint64_t value) {
  while (value != 0) {
    limbs_.push_back(static_cast<std::uint32_t>(value));
    value >>= 32;
  }
}

BigUint BigUint::from_hex(std::string_view hex) {
  BigUint out;
  std::size_t digits = 0;
  // Walk from the least significant digit, packing 8 nibbles per limb.
  std::uint32_t limb = 0;
  unsigned shift = 0;
  for (auto it = hex.rbegin(); it != hex.rend(); ++it) {
    const char c = *it;
    if (c == ' ') continue;
    unsigned nibble;
    if (c >= '0' && c <= '9') {
      nibble = static_cast<unsigned>(c - '0');
    } else if (c >= 'a' && c <= 'f') {
      nibble = static_cast<unsigned>(c - 'a' + 10);
    } else if (c >= 'A' && c <= 'F') {
      nibble = static_cast<unsigned>(c - 'A' + 10);
    } else {
      throw Error(Errc::InvalidHexDigit, "invalid hex digit '" + std::string(1, c) + "'");
    }
    ++digits;
    limb |= nibble << shift;
    shift += 4;
    if (shift == 32) {
      out.limbs_.push_back(limb);
      limb = 0;
      shift = 0;
    }
  }
  if (digits == 0) throw Error(Errc::InvalidHexDigit, "no hex digits");
  if (shift != 0) out.limbs_.push_back(limb);
  out.trim();
  return out;
}

void BigUint::trim() {
  while (!limbs_.empty() && limbs_.back() == 0) limbs_.pop_back();
}

std::uint32_t BigUint::divmod_small(std::uint32_t divisor) {
  std::uint64_t rem = 0;
  for (auto it = limbs_.rbegin(); it != limbs_.rend(); ++it) {
    const std::uint64_t cur = (rem << 32) | *it;
    *it = static_cast<std::uint32_t>(cur / divisor);
    rem = cur % divisor;
  }
  trim();
  return static_cast<std::uint32_t>(rem);
}

std::string BigUint::to_hex() const {
  if (limbs_.empty()) return "0";
  static constexpr char kDigits[] = "0123456789ABCDEF";
  std::string out;
  for (std::uint32_t limb : limbs_) {
    for (int i = 0; i < 8; ++i) {
      out.push_back(kDigits[limb & 0xF]);
      limb >>= 4;
    }
  }
  while (out.size() > 1 && out.back() == '0') out.pop_back();
  std::reverse(out.begin(), out.end());
  return out;
}

std::string BigUint::to_decimal() const {
  if (limbs_.empty()) return "0";
  BigUint work = *this;
  std::string out;
  // Peel nine decimal digits at a time.
  while (!work.is_zero()) {
    std::uint32_t chunk = work.divmod_small(1'000'000'000u);
    for (int i = 0; i < 9; ++i) {
      out.push_back(static_cast<char>('0' + chunk % 10));
      chunk /= 10;
      if (work.is_zero() && chunk == 0) break;
    }
  }
  while (out.size() > 1 && out.back() == '0') out.pop_back();
  std::reverse(out.begin(), out.end());
  return out;
}

double BigUint::to_double() const {
  double out = 0.0;
  for (auto it = limbs_.rbegin(); it != limbs_.rend(); ++it) out = out * 4294967296.0 + static_cast<double>(*it);
  return out;
}

std::size_t BigUint::bit_width() const {
  if (limbs_.empty()) return 0;
  std::size_t bits = 32 * (limbs_.size() - 1);
  for (std::uint32_t top = limbs_.back(); top != 0; top >>= 1) ++bits;
  return bits;
}

}  // namespace canids
