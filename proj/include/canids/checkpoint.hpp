#pragma once

// Model checkpoints:
//
//   "CANCKPT1"  u8 version
//   u64 len, architecture descriptor (nn::Network::descriptor)
//   per layer: u64 n, f64[n] weights, u64 n, f64[n] biases
//   u64 n_norm; per range: u64 len, name, f64 min, f64 max
//   u64 training seed, u64 config digest
//   u64 FNV-1a of every preceding byte
//
// All integers little-endian.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "canids/ingest.hpp"
#include "canids/nn.hpp"

namespace canids::checkpoint {

inline constexpr char kMagic[] = "CANCKPT1";
inline constexpr std::uint8_t kVersion = 1;

struct Checkpoint {
  nn::Network model;
  ingest::NormalizationParams norm;
  std::uint64_t seed = 0;
  std::uint64_t config_digest = 0;

  bool operator==(const Checkpoint&) const = default;
};

/// FNV-1a of a canonical config string.
std::uint64_t digest(std::string_view config_text);

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
/// Throws CorruptCheckpoint (bad magic, truncation, checksum, bad descriptor)
/// or VersionMismatch.
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace canids::checkpoint
