#pragma once

// Log parsing and the three preparation steps (cleaning, integration,
// transformation) that turn raw rows into fixed-width model inputs and
// seeded train / validation / test partitions.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "canids/stats.hpp"
#include "canids/traffic.hpp"

namespace canids::ingest {

/// One parsed row. Text fields are kept verbatim; a field that failed to parse
/// (or was empty) has its missing flag set.
struct RawRecord {
  std::optional<double> timestamp;
  std::string can_id_hex;
  std::optional<int> dlc;
  std::string data_hex;
  std::string label_text;
  std::optional<AttackKind> kind;  // sixth column, simulator logs only

  bool missing_can_id = false;
  bool missing_data = false;
  bool missing_label = false;

  bool any_missing() const noexcept {
    return !timestamp || !dlc || missing_can_id || missing_data || missing_label;
  }
  bool operator==(const RawRecord&) const = default;
};

/// Parses `Timestamp,CAN_ID,DLC,Data_Field,Label[,Attack_Kind]` rows. The
/// header row is optional. Rows with neither CAN_ID nor Data_Field are
/// rejected. Throws UnreadableStream or EmptyInput.
std::vector<RawRecord> parse_log(std::istream& in);

/// Label text to 0/1: "0"/"1", "Normal"/"Attack", and the Car-Hacking "R"/"T"
/// flags (case-insensitive).
std::optional<Label> parse_label(std::string_view text) noexcept;

enum class ImputePolicy { DropRow, FieldMean };

/// DropRow removes every row with a missing flag. FieldMean replaces missing
/// Timestamp, CAN_ID and DLC with the column mean of the present values (CAN_ID
/// and DLC rounded to the nearest integer); rows missing Data_Field or Label
/// have nothing to average and are dropped. Throws AllRowsMissing when a
/// column to be averaged has no present value.
std::vector<RawRecord> impute_missing(std::vector<RawRecord> records, ImputePolicy policy);

/// A row after cleaning and hex-to-decimal integration.
struct CleanRecord {
  double timestamp = 0.0;
  std::uint32_t can_id = 0;
  std::uint8_t dlc = 0;
  std::vector<std::uint8_t> payload;  // may exceed 8 bytes for real logs
  Label label = Label::Normal;
  AttackKind kind = AttackKind::None;
};

/// Converts imputed rows. Rows whose hex fields still fail to parse are
/// dropped. The count of dropped rows is written to `dropped` when given.
std::vector<CleanRecord> integrate(std::span<const RawRecord> records, std::size_t* dropped = nullptr);

/// Simulator records map 1:1 to clean records.
std::vector<CleanRecord> from_traffic(const TrafficLog& log);

/// Timestamp, CAN_ID, DLC and Data_Field (payload as one big decimal integer)
/// as numeric columns for correlation analysis.
std::vector<stats::NamedColumn> correlation_columns(std::span<const RawRecord> records);

// --- transformation -------------------------------------------------------

inline constexpr std::size_t kFeatureWidth = 16;
inline constexpr std::size_t kPayloadFeatures = 8;

struct FeatureVector {
  std::array<double, kFeatureWidth> x{};
  std::uint8_t y = 0;
  bool operator==(const FeatureVector&) const = default;
};

struct MinMax {
  double min = 0.0;
  double max = 0.0;

  /// (x - min) / (max - min), 0 when max == min, clamped into [0, 1].
  double apply(double x) const noexcept;
  bool operator==(const MinMax&) const = default;
};

/// Per-feature min/max; features are named so a checkpoint or container can
/// be matched against the encoder that uses it.
struct NormalizationParams {
  std::vector<std::string> names;
  std::vector<MinMax> ranges;

  const MinMax* find(std::string_view name) const noexcept;
  bool operator==(const NormalizationParams&) const = default;
};

/// Fits one MinMax per column. Throws EmptyColumn if any column is empty.
NormalizationParams fit_minmax(std::span<const stats::NamedColumn> columns);

inline double apply_minmax(double x, const MinMax& range) noexcept { return range.apply(x); }

/// Fits the "can_id" and "dlc" ranges on the given (training) records.
NormalizationParams fit_record_normalization(std::span<const CleanRecord> train);

/// [can_id_norm, dlc_norm, byte0/255 .. byte7/255, 0 x 6]. Missing payload
/// bytes are zero; bytes beyond the eighth are ignored. Throws
/// UnnormalizedInput if `params` lacks "can_id" or "dlc".
FeatureVector encode_record(const CleanRecord& record, const NormalizationParams& params);

// --- splitting --------------------------------------------------------------

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

/// Seeded shuffle of [0, n); the first floor(test_fraction * n) shuffled
/// indices form the test set, the remainder the train block; the first
/// floor(val_fraction * |train block|) of that block form the validation set.
/// Throws EmptyInput for n == 0.
SplitIndices split_indices(std::size_t n, double test_fraction, double val_fraction, std::uint64_t seed);

struct Partition {
  std::vector<FeatureVector> rows;
  std::vector<AttackKind> kinds;  // parallel to rows

  std::size_t size() const noexcept { return rows.size(); }
  bool operator==(const Partition&) const = default;
};

struct PreparedDataset {
  Partition train;
  Partition validation;
  Partition test;
  NormalizationParams norm;
  std::string provenance;
  std::uint64_t seed = 0;

  bool operator==(const PreparedDataset&) const = default;
};

struct SplitConfig {
  double test_fraction = 0.2;
  double val_fraction = 0.2;
  std::uint64_t seed = 0;
};

/// Splits records, fits normalization on the final training partition only
/// and encodes every partition with it.
PreparedDataset split_dataset(std::span<const CleanRecord> records, const SplitConfig& cfg);

struct PrepareConfig {
  ImputePolicy impute = ImputePolicy::DropRow;
  /// Rosner screening of the DLC column; flagged rows are removed.
  bool remove_dlc_outliers = false;
  std::size_t max_outliers = 10;
  double outlier_alpha = 0.05;
  SplitConfig split;
};

struct PrepareSummary {
  std::size_t raw_rows = 0;
  std::size_t after_imputation = 0;
  std::size_t after_integration = 0;
  std::size_t outliers_removed = 0;
};

/// Cleaning -> integration -> transformation over one or more parsed logs.
PreparedDataset prepare(std::span<const std::vector<RawRecord>> logs, const PrepareConfig& cfg,
                        PrepareSummary* summary = nullptr);

}  // namespace canids::ingest
