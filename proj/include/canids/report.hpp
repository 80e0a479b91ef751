#pragma once

// Evaluation reports. Every number is rounded to four decimals once, and the
// same rounded values feed both the JSON document and the fixed-width table.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "canids/metrics.hpp"
#include "canids/plenet.hpp"

namespace canids::report {

double round4(double v);

struct ModelRow {
  std::string model;
  metrics::MetricsReport metrics;
};

nlohmann::json to_json(const metrics::MetricsReport& m);
nlohmann::json to_json(const std::vector<ModelRow>& rows, const std::string& dataset);

/// One row per model: accuracy, precision, recall, F1, ROC AUC, TPR, TNR,
/// confusion counts, and recall per attack kind ("-" when unknown).
std::string text_table(const std::vector<ModelRow>& rows);

/// Reference P-LeNet figures on the Car-Hacking data, with the note that its
/// F1 is not the harmonic mean of its precision and recall.
std::string reference_footer();

/// Writes `<stem>.json` and `<stem>.txt`.
void write_report(const std::filesystem::path& stem, const std::vector<ModelRow>& rows, const std::string& dataset,
                  bool with_reference = false);

/// epoch,train_acc,val_acc,train_loss,val_loss (epochs numbered from 1).
void write_history_csv(std::ostream& out, const plenet::TrainHistory& history);

}  // namespace canids::report
