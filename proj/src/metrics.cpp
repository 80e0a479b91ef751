#include "canids/metrics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "canids/error.hpp"

namespace canids::metrics {
namespace {

void check_binary(std::span<const std::uint8_t> values, const char* what) {
  for (auto v : values) {
    if (v > 1) throw Error(Errc::InvalidLabel, std::string(what) + " contains a value outside {0,1}");
  }
}

double ratio(std::uint64_t num, std::uint64_t den, unsigned flag, unsigned& flags) {
  if (den == 0) {
    flags |= flag;
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ConfusionMatrix confusion(std::span<const std::uint8_t> labels, std::span<const std::uint8_t> predictions) {
  if (labels.size() != predictions.size()) throw Error(Errc::LengthMismatch, "labels and predictions differ in length");
  check_binary(labels, "labels");
  check_binary(predictions, "predictions");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) {
      (predictions[i] == 1 ? cm.tp : cm.fn) += 1;
    } else {
      (predictions[i] == 1 ? cm.fp : cm.tn) += 1;
    }
  }
  return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw Error(Errc::EmptyMatrix, "confusion matrix is empty");
  MetricsReport r;
  r.cm = cm;
  r.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
  r.precision = ratio(cm.tp, cm.tp + cm.fp, kPrecisionUndefined, r.degenerate);
  r.recall = ratio(cm.tp, cm.tp + cm.fn, kRecallUndefined, r.degenerate);
  r.tpr = r.recall;
  r.tnr = ratio(cm.tn, cm.tn + cm.fp, kSpecificityUndefined, r.degenerate);
  if (r.precision + r.recall > 0.0) {
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  } else {
    r.degenerate |= kF1Undefined;
  }
  return r;
}

RocCurve roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw Error(Errc::LengthMismatch, "scores and labels differ in length");
  check_binary(labels, "labels");
  const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  const std::size_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) throw Error(Errc::SingleClassInput, "ROC needs both classes");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  std::size_t tp = 0, fp = 0;
  double area = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    const std::size_t tp_before = tp, fp_before = fp;
    while (i < order.size() && scores[order[i]] == threshold) {
      (labels[order[i]] == 1 ? tp : fp) += 1;
      ++i;
    }
    // Trapezoid in count space; normalized once at the end.
    area += static_cast<double>(fp - fp_before) * static_cast<double>(tp + tp_before) / 2.0;
    curve.points.push_back({static_cast<double>(fp) / static_cast<double>(negatives),
                            static_cast<double>(tp) / static_cast<double>(positives), threshold});
  }
  curve.auc = area / (static_cast<double>(positives) * static_cast<double>(negatives));
  return curve;
}

MetricsReport evaluate_predictions(std::span<const std::uint8_t> labels, std::span<const std::uint8_t> predictions,
                                   std::span<const double> attack_scores, std::span<const AttackKind> kinds) {
  MetricsReport r = metrics(confusion(labels, predictions));
  const auto positives = std::count(labels.begin(), labels.end(), 1);
  if (!attack_scores.empty() && positives > 0 && static_cast<std::size_t>(positives) < labels.size()) {
    r.roc_auc = roc_auc(attack_scores, labels).auc;
  }
  if (!kinds.empty()) {
    if (kinds.size() != labels.size()) throw Error(Errc::LengthMismatch, "kinds and labels differ in length");
    std::map<AttackKind, std::uint64_t> hit;
    for (std::size_t i = 0; i < kinds.size(); ++i) {
      if (kinds[i] == AttackKind::None) continue;
      r.count_by_kind[kinds[i]] += 1;
      hit[kinds[i]] += predictions[i] == 1 ? 1 : 0;
    }
    for (const auto& [kind, n] : r.count_by_kind) {
      r.recall_by_kind[kind] = static_cast<double>(hit[kind]) / static_cast<double>(n);
    }
  }
  return r;
}

}  // namespace canids::metrics
