#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace canids {

/// Arbitrary-precision unsigned integer, just enough for converting wide hex
/// payload strings (up to and beyond 152 bits) to decimal.
class BigUint {
 public:
  BigUint() = default;
  explicit BigUint(std::uint64_t value);

  /// Parses hex digits; spaces are ignored. Throws InvalidHexDigit on any
  /// other non-hex character or when no digit is present.
  static BigUint from_hex(std::string_view hex);

  std::string to_hex() const;  // canonical: uppercase, no leading zeros, "0" for zero
  std::string to_decimal() const;
  double to_double() const;
  std::size_t bit_width() const;
  bool is_zero() const noexcept { return limbs_.empty(); }

  bool operator==(const BigUint&) const = default;

 private:
  void trim();
  std::uint32_t divmod_small(std::uint32_t divisor);  // in place, returns remainder

  std::vector<std::uint32_t> limbs_;  // little-endian base 2^32
};

/// hex2dec on a Data_Field / CAN_ID string.
inline BigUint hex_to_dec(std::string_view hex) { return BigUint::from_hex(hex); }

}  // namespace canids
