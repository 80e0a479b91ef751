#pragma once

// Logical (unstuffed) model of a standard 11-bit CAN 2.0A data frame.

#include <cstdint>
#include <span>
#include <vector>

namespace canids::canbus {

inline constexpr std::uint16_t kMaxIdentifier = 0x7FF;
inline constexpr std::uint8_t kMaxDlc = 8;
/// x^15 + x^14 + x^10 + x^8 + x^7 + x^4 + x^3 + 1, leading term implicit.
inline constexpr std::uint16_t kCrc15Generator = 0x4599;

/// One bit per element, 0 = dominant, 1 = recessive.
using Bits = std::vector<std::uint8_t>;

struct CanFrame {
  std::uint16_t identifier = 0;
  bool rtr = false;
  bool ide = false;
  bool reserved = false;
  std::uint8_t dlc = 0;
  std::vector<std::uint8_t> payload;
  std::uint16_t crc = 0;

  /// Builds a data frame with dlc and crc derived from the payload.
  static CanFrame data(std::uint16_t identifier, std::vector<std::uint8_t> payload);

  bool operator==(const CanFrame&) const = default;
};

// Field widths, in transmission order.
inline constexpr std::size_t kSofBits = 1;
inline constexpr std::size_t kIdentifierBits = 11;
inline constexpr std::size_t kControlBits = 3 + 4;  // RTR, IDE, r0, DLC
inline constexpr std::size_t kCrcBits = 15;
inline constexpr std::size_t kEofBits = 7;
inline constexpr std::size_t kHeaderBits = kSofBits + kIdentifierBits + kControlBits;  // 19
/// SOF through EOF with an empty data field: 19 + 15 + CRC delim + ACK slot + ACK delim + 7.
inline constexpr std::size_t kFrameOverheadBits = kHeaderBits + kCrcBits + 3 + kEofBits;  // 44

constexpr std::size_t frame_bit_length(std::uint8_t dlc) { return kFrameOverheadBits + 8u * dlc; }

/// CAN CRC-15 shift register over `bits` (zero initial value). Equals the
/// remainder of bits(x) * x^15 divided by the generator polynomial.
std::uint16_t crc15(std::span<const std::uint8_t> bits);

/// CRC of the frame's SOF-through-data bits.
std::uint16_t frame_crc(const CanFrame& frame);

/// Throws MalformedFrame if the frame violates the 11-bit data-frame invariants.
void validate(const CanFrame& frame);

/// SOF | ID | RTR | IDE | r0 | DLC | data | CRC | CRC delim | ACK slot | ACK delim | EOF.
/// The ACK slot is emitted dominant (an acknowledged frame as seen on the bus).
/// No bit stuffing. The returned bits carry a freshly computed CRC regardless of
/// frame.crc.
Bits encode_frame(const CanFrame& frame);

/// Inverse of encode_frame. Throws MalformedFrame on framing violations and
/// CrcMismatch when the embedded CRC disagrees with the recomputed one.
CanFrame decode_frame(std::span<const std::uint8_t> bits);

}  // namespace canids::canbus
