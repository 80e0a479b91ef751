#include "canids/canbus.hpp"

#include <string>

#include "canids/error.hpp"

namespace canids::canbus {
namespace {

void put(Bits& out, std::uint32_t value, std::size_t width) {
  for (std::size_t i = width; i-- > 0;) out.push_back(static_cast<std::uint8_t>((value >> i) & 1u));
}

std::uint32_t take(std::span<const std::uint8_t> bits, std::size_t& pos, std::size_t width) {
  std::uint32_t value = 0;
  for (std::size_t i = 0; i < width; ++i) value = (value << 1) | (bits[pos++] & 1u);
  return value;
}

[[noreturn]] void malformed(const std::string& why) { throw Error(Errc::MalformedFrame, why); }

}  // namespace

CanFrame CanFrame::data(std::uint16_t identifier, std::vector<std::uint8_t> payload) {
  CanFrame f;
  f.identifier = identifier;
  f.dlc = static_cast<std::uint8_t>(payload.size());
  f.payload = std::move(payload);
  f.crc = frame_crc(f);
  return f;
}

std::uint16_t crc15(std::span<const std::uint8_t> bits) {
  std::uint16_t crc = 0;
  for (std::uint8_t bit : bits) {
    const bool feedback = ((bit & 1u) != 0) != (((crc >> 14) & 1u) != 0);
    crc = static_cast<std::uint16_t>((crc << 1) & 0x7FFF);
    if (feedback) crc ^= kCrc15Generator;
  }
  return crc;
}

void validate(const CanFrame& frame) {
  if (frame.identifier > kMaxIdentifier) malformed("identifier exceeds 11 bits");
  if (frame.ide) malformed("extended (29-bit) frames are not supported");
  if (frame.dlc > kMaxDlc) malformed("dlc > 8");
  if (frame.payload.size() != frame.dlc) malformed("payload length differs from dlc");
}

namespace {

Bits header_and_data(const CanFrame& frame) {
  Bits bits;
  bits.reserve(frame_bit_length(frame.dlc));
  put(bits, 0, kSofBits);
  put(bits, frame.identifier, kIdentifierBits);
  put(bits, frame.rtr, 1);
  put(bits, frame.ide, 1);
  put(bits, frame.reserved, 1);
  put(bits, frame.dlc, 4);
  for (std::uint8_t byte : frame.payload) put(bits, byte, 8);
  return bits;
}

}  // namespace

std::uint16_t frame_crc(const CanFrame& frame) {
  validate(frame);
  return crc15(header_and_data(frame));
}

Bits encode_frame(const CanFrame& frame) {
  validate(frame);
  Bits bits = header_and_data(frame);
  put(bits, crc15(bits), kCrcBits);
  put(bits, 1, 1);  // CRC delimiter
  put(bits, 0, 1);  // ACK slot
  put(bits, 1, 1);  // ACK delimiter
  put(bits, 0x7F, kEofBits);
  return bits;
}

CanFrame decode_frame(std::span<const std::uint8_t> bits) {
  if (bits.size() < kFrameOverheadBits) malformed("sequence shorter than an empty frame");
  for (std::uint8_t b : bits) {
    if (b > 1) malformed("bit value other than 0/1");
  }
  std::size_t pos = 0;
  if (take(bits, pos, kSofBits) != 0) malformed("SOF not dominant");
  CanFrame f;
  f.identifier = static_cast<std::uint16_t>(take(bits, pos, kIdentifierBits));
  f.rtr = take(bits, pos, 1) != 0;
  f.ide = take(bits, pos, 1) != 0;
  f.reserved = take(bits, pos, 1) != 0;
  f.dlc = static_cast<std::uint8_t>(take(bits, pos, 4));
  if (f.ide) malformed("extended (29-bit) frames are not supported");
  if (f.dlc > kMaxDlc) malformed("dlc > 8");
  if (bits.size() != frame_bit_length(f.dlc)) {
    malformed("length " + std::to_string(bits.size()) + " does not match dlc " + std::to_string(f.dlc));
  }
  f.payload.reserve(f.dlc);
  for (std::uint8_t i = 0; i < f.dlc; ++i) f.payload.push_back(static_cast<std::uint8_t>(take(bits, pos, 8)));
  const std::size_t covered = pos;
  f.crc = static_cast<std::uint16_t>(take(bits, pos, kCrcBits));
  if (take(bits, pos, 1) != 1) malformed("CRC delimiter not recessive");
  if (take(bits, pos, 1) != 0) malformed("ACK slot not dominant (unacknowledged frame)");
  if (take(bits, pos, 1) != 1) malformed("ACK delimiter not recessive");
  if (take(bits, pos, kEofBits) != 0x7F) malformed("EOF not recessive");
  if (crc15(bits.first(covered)) != f.crc) throw Error(Errc::CrcMismatch, "embedded CRC does not match");
  return f;
}

}  // namespace canids::canbus
