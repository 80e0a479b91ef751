#pragma once

// Binary container for a PreparedDataset:
//
//   "CANIDS1"                      7-byte magic
//   u64 n_train, n_val, n_test     little-endian
//   u64 feature_width              (16)
//   per partition (train, val, test):
//     f64[n * width]               row-major features
//     u8[n]                        labels
//   u64 n_norm; (f64 min, f64 max) * n_norm
//   "KINDS"  u8[n_train + n_val + n_test]   attack-kind provenance, optional
//
// Feature names of the normalization ranges are recorded in the manifest.

#include <filesystem>
#include <iosfwd>

#include "canids/ingest.hpp"

namespace canids::ingest {

inline constexpr char kDatasetMagic[] = "CANIDS1";

void write_dataset(std::ostream& out, const PreparedDataset& ds);
/// Throws CorruptDataset on a bad magic, truncation or inconsistent sizes.
PreparedDataset read_dataset(std::istream& in);

/// Writes the container to `path` and a key=value manifest to `path` + ".manifest".
void save_dataset(const std::filesystem::path& path, const PreparedDataset& ds);
/// Reads a container; provenance and normalization names come from the
/// manifest when it exists.
PreparedDataset load_dataset(const std::filesystem::path& path);

std::filesystem::path manifest_path(const std::filesystem::path& dataset);

}  // namespace canids::ingest
