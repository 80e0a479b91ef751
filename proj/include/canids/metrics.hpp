#pragma once

// Confusion counts with Attack (1) as the positive class, the derived
// accuracy / precision / recall / F1 / sensitivity / specificity, and ROC AUC.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "canids/traffic.hpp"

namespace canids::metrics {

struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const noexcept { return tp + tn + fp + fn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

/// Throws LengthMismatch or InvalidLabel (values other than 0/1).
ConfusionMatrix confusion(std::span<const std::uint8_t> labels, std::span<const std::uint8_t> predictions);

/// Bit flags for ratios whose denominator was zero (reported as 0.0).
enum DegenerateFlag : unsigned {
  kNone = 0,
  kPrecisionUndefined = 1u << 0,
  kRecallUndefined = 1u << 1,
  kF1Undefined = 1u << 2,
  kSpecificityUndefined = 1u << 3,
};

struct MetricsReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double tpr = 0.0;  // sensitivity, equal to recall
  double tnr = 0.0;  // specificity
  std::optional<double> roc_auc;
  unsigned degenerate = kNone;
  ConfusionMatrix cm;
  /// Recall restricted to rows of one attack kind (simulator data only).
  std::map<AttackKind, double> recall_by_kind;
  std::map<AttackKind, std::uint64_t> count_by_kind;
};

/// Throws EmptyMatrix when the matrix has no samples.
MetricsReport metrics(const ConfusionMatrix& cm);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;  // predict Attack when score >= threshold
};

struct RocCurve {
  double auc = 0.0;
  std::vector<RocPoint> points;  // from (0,0) to (1,1)
};

/// Exact threshold sweep over distinct scores in descending order; tied
/// scores move in one step; trapezoidal area. Throws SingleClassInput,
/// LengthMismatch or InvalidLabel.
RocCurve roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

/// Confusion, metrics, ROC AUC and per-kind recall in one call. `kinds` may
/// be empty; otherwise it parallels labels.
MetricsReport evaluate_predictions(std::span<const std::uint8_t> labels, std::span<const std::uint8_t> predictions,
                                   std::span<const double> attack_scores, std::span<const AttackKind> kinds);

}  // namespace canids::metrics
