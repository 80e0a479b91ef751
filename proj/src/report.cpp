#include "canids/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "canids/error.hpp"

namespace canids::report {

double round4(double v) { return std::round(v * 1e4) / 1e4; }

namespace {

constexpr AttackKind kKinds[] = {AttackKind::Flooding, AttackKind::Fuzzing, AttackKind::Spoofing};

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", round4(v));
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

}  // namespace

nlohmann::json to_json(const metrics::MetricsReport& m) {
  nlohmann::json j;
  j["accuracy"] = round4(m.accuracy);
  j["precision"] = round4(m.precision);
  j["recall"] = round4(m.recall);
  j["f1"] = round4(m.f1);
  j["tpr"] = round4(m.tpr);
  j["tnr"] = round4(m.tnr);
  j["roc_auc"] = m.roc_auc ? nlohmann::json(round4(*m.roc_auc)) : nlohmann::json(nullptr);
  j["confusion"] = {{"tp", m.cm.tp}, {"tn", m.cm.tn}, {"fp", m.cm.fp}, {"fn", m.cm.fn}};
  nlohmann::json flags = nlohmann::json::array();
  if (m.degenerate & metrics::kPrecisionUndefined) flags.push_back("precision_undefined");
  if (m.degenerate & metrics::kRecallUndefined) flags.push_back("recall_undefined");
  if (m.degenerate & metrics::kF1Undefined) flags.push_back("f1_undefined");
  if (m.degenerate & metrics::kSpecificityUndefined) flags.push_back("specificity_undefined");
  j["degenerate"] = flags;
  nlohmann::json by_kind = nlohmann::json::object();
  for (const auto& [kind, recall] : m.recall_by_kind) {
    by_kind[std::string(attack_kind_name(kind))] = {{"recall", round4(recall)}, {"count", m.count_by_kind.at(kind)}};
  }
  j["by_attack_kind"] = by_kind;
  return j;
}

nlohmann::json to_json(const std::vector<ModelRow>& rows, const std::string& dataset) {
  nlohmann::json j;
  j["dataset"] = dataset;
  j["models"] = nlohmann::json::array();
  for (const auto& row : rows) {
    auto entry = to_json(row.metrics);
    entry["model"] = row.model;
    j["models"].push_back(entry);
  }
  return j;
}

std::string text_table(const std::vector<ModelRow>& rows) {
  const std::vector<std::string> head{"Model",  "Accuracy", "Precision", "Recall", "F1",       "ROC_AUC",
                                      "TPR",    "TNR",      "TP",        "TN",     "FP",       "FN",
                                      "R_flood", "R_fuzz",  "R_spoof"};
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    std::vector<std::string> line{r.model,
                                  fixed4(m.accuracy),
                                  fixed4(m.precision),
                                  fixed4(m.recall),
                                  fixed4(m.f1),
                                  m.roc_auc ? fixed4(*m.roc_auc) : "-",
                                  fixed4(m.tpr),
                                  fixed4(m.tnr),
                                  std::to_string(m.cm.tp),
                                  std::to_string(m.cm.tn),
                                  std::to_string(m.cm.fp),
                                  std::to_string(m.cm.fn)};
    for (auto kind : kKinds) {
      const auto it = m.recall_by_kind.find(kind);
      line.push_back(it == m.recall_by_kind.end() ? "-" : fixed4(it->second));
    }
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> width(head.size());
  for (std::size_t c = 0; c < head.size(); ++c) {
    width[c] = head[c].size();
    for (const auto& line : cells) width[c] = std::max(width[c], line[c].size());
  }
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& line) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      if (c == 0) {
        out << line[c] << std::string(width[c] - line[c].size(), ' ');
      } else {
        out << "  " << pad(line[c], width[c]);
      }
    }
    out << '\n';
  };
  emit(head);
  for (const auto& line : cells) emit(line);
  return out.str();
}

std::string reference_footer() {
  return "Reference P-LeNet on the Car-Hacking data: accuracy 0.9810, precision 0.9814, recall 0.9804, "
         "F1 0.9783, ROC AUC 0.9542.\n"
         "Note: the reference F1 is not the harmonic mean of the reference precision and recall (that would be "
         "0.9809). F1 here is always 2PR/(P+R).\n";
}

void write_report(const std::filesystem::path& stem, const std::vector<ModelRow>& rows, const std::string& dataset,
                  bool with_reference) {
  auto json_path = stem;
  json_path += ".json";
  auto text_path = stem;
  text_path += ".txt";
  std::ofstream js(json_path);
  std::ofstream tx(text_path);
  if (!js || !tx) throw Error(Errc::IoFailure, "cannot write report " + stem.string());
  auto j = to_json(rows, dataset);
  if (with_reference) j["reference_note"] = reference_footer();
  js << j.dump(2) << '\n';
  tx << "dataset: " << dataset << '\n' << text_table(rows);
  if (with_reference) tx << '\n' << reference_footer();
}

void write_history_csv(std::ostream& out, const plenet::TrainHistory& history) {
  out << "epoch,train_acc,val_acc,train_loss,val_loss\n";
  char buf[128];
  for (std::size_t i = 0; i < history.epochs.size(); ++i) {
    const auto& e = history.epochs[i];
    std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f,%.6f,%.6f\n", i + 1, e.train_acc, e.val_acc, e.train_loss, e.val_loss);
    out << buf;
  }
}

}  // namespace canids::report
