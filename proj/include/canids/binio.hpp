#pragma once

// Little-endian primitives shared by the dataset container and checkpoints.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>

namespace canids::binio {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  } else {
    return v;
  }
}

inline void put_u8(std::ostream& out, std::uint8_t v) { out.put(static_cast<char>(v)); }

inline void put_u64(std::ostream& out, std::uint64_t v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

inline void put_f64s(std::ostream& out, std::span<const double> vs) {
  for (double v : vs) put_f64(out, v);
}

inline void put_bytes(std::ostream& out, std::string_view s) { out.write(s.data(), static_cast<std::streamsize>(s.size())); }

/// Reads fail softly: each getter returns false on a short read.
inline bool get_u8(std::istream& in, std::uint8_t& v) {
  char c;
  if (!in.get(c)) return false;
  v = static_cast<std::uint8_t>(c);
  return true;
}

inline bool get_u64(std::istream& in, std::uint64_t& v) {
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) return false;
  v = to_little(v);
  return true;
}

inline bool get_f64(std::istream& in, double& v) {
  std::uint64_t raw;
  if (!get_u64(in, raw)) return false;
  v = std::bit_cast<double>(raw);
  return true;
}

inline bool get_bytes(std::istream& in, std::string& s, std::size_t n) {
  s.resize(n);
  return static_cast<bool>(in.read(s.data(), static_cast<std::streamsize>(n)));
}

/// FNV-1a, 64-bit.
inline std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace canids::binio
