#include "canids/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <set>

#include "canids/biguint.hpp"
#include "canids/error.hpp"
#include "canids/rng.hpp"

namespace canids::ingest {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::optional<double> parse_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<int> parse_int(std::string_view s) {
  if (s.empty()) return std::nullopt;
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v < 0) return std::nullopt;
  return v;
}

bool is_hex(char c) { return std::isxdigit(static_cast<unsigned char>(c)) != 0; }

bool valid_id_hex(std::string_view s) { return !s.empty() && std::all_of(s.begin(), s.end(), is_hex); }

/// Space-separated byte tokens, or one unbroken run of an even number of digits.
std::optional<std::vector<std::uint8_t>> parse_bytes(std::string_view s) {
  std::vector<std::uint8_t> out;
  std::string digits;
  std::size_t pos = 0;
  while (pos < s.size()) {
    while (pos < s.size() && s[pos] == ' ') ++pos;
    const auto begin = pos;
    while (pos < s.size() && s[pos] != ' ') ++pos;
    const auto token = s.substr(begin, pos - begin);
    if (token.empty()) continue;
    if (token.size() % 2 != 0 || !std::all_of(token.begin(), token.end(), is_hex)) return std::nullopt;
    for (std::size_t i = 0; i < token.size(); i += 2) {
      unsigned v = 0;
      std::from_chars(token.data() + i, token.data() + i + 2, v, 16);
      out.push_back(static_cast<std::uint8_t>(v));
    }
  }
  return out;
}

bool looks_like_header(std::string_view line) {
  std::string lower(line);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  return lower.find("timestamp") != std::string::npos || lower.find("can_id") != std::string::npos ||
         lower.find("can id") != std::string::npos;
}

}  // namespace

std::optional<Label> parse_label(std::string_view text) noexcept {
  std::string lower(trim(text));
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "0" || lower == "normal" || lower == "r") return Label::Normal;
  if (lower == "1" || lower == "attack" || lower == "t") return Label::Attack;
  return std::nullopt;
}

std::vector<RawRecord> parse_log(std::istream& in) {
  if (!in.good()) throw Error(Errc::UnreadableStream, "input stream is not readable");
  std::vector<RawRecord> out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    const auto view = trim(line);
    if (view.empty()) continue;
    if (first) {
      first = false;
      if (looks_like_header(view)) continue;
    }
    auto fields = split_fields(view);
    fields.resize(std::max<std::size_t>(fields.size(), 5));

    RawRecord rec;
    rec.timestamp = parse_double(fields[0]);
    rec.can_id_hex = std::string(fields[1]);
    rec.dlc = parse_int(fields[2]);
    rec.data_hex = std::string(fields[3]);
    rec.label_text = std::string(fields[4]);
    if (fields.size() > 5 && !fields[5].empty()) rec.kind = parse_attack_kind(fields[5]);

    rec.missing_can_id = !valid_id_hex(fields[1]);
    if (fields[3].empty()) {
      rec.missing_data = !rec.dlc || *rec.dlc > 0;
    } else {
      rec.missing_data = !parse_bytes(fields[3]).has_value();
    }
    rec.missing_label = !parse_label(fields[4]).has_value();
    if (fields[1].empty() && fields[3].empty()) continue;  // nothing to identify the frame
    out.push_back(std::move(rec));
  }
  if (in.bad()) throw Error(Errc::UnreadableStream, "read error");
  if (out.empty()) throw Error(Errc::EmptyInput, "log contains no data rows");
  return out;
}

std::vector<RawRecord> impute_missing(std::vector<RawRecord> records, ImputePolicy policy) {
  if (policy == ImputePolicy::DropRow) {
    std::erase_if(records, [](const RawRecord& r) { return r.any_missing(); });
    return records;
  }
  std::erase_if(records, [](const RawRecord& r) { return r.missing_data || r.missing_label; });

  double ts_sum = 0.0, id_sum = 0.0, dlc_sum = 0.0;
  std::size_t ts_n = 0, id_n = 0, dlc_n = 0;
  bool need_ts = false, need_id = false, need_dlc = false;
  for (const auto& r : records) {
    if (r.timestamp) {
      ts_sum += *r.timestamp;
      ++ts_n;
    } else {
      need_ts = true;
    }
    if (!r.missing_can_id) {
      id_sum += BigUint::from_hex(r.can_id_hex).to_double();
      ++id_n;
    } else {
      need_id = true;
    }
    if (r.dlc) {
      dlc_sum += *r.dlc;
      ++dlc_n;
    } else {
      need_dlc = true;
    }
  }
  if ((need_ts && ts_n == 0) || (need_id && id_n == 0) || (need_dlc && dlc_n == 0)) {
    throw Error(Errc::AllRowsMissing, "a column to impute has no present values");
  }
  for (auto& r : records) {
    if (!r.timestamp) r.timestamp = ts_sum / static_cast<double>(ts_n);
    if (r.missing_can_id) {
      r.can_id_hex = BigUint(static_cast<std::uint64_t>(std::llround(id_sum / static_cast<double>(id_n)))).to_hex();
      r.missing_can_id = false;
    }
    if (!r.dlc) r.dlc = static_cast<int>(std::lround(dlc_sum / static_cast<double>(dlc_n)));
  }
  return records;
}

std::vector<CleanRecord> integrate(std::span<const RawRecord> records, std::size_t* dropped) {
  std::vector<CleanRecord> out;
  out.reserve(records.size());
  std::size_t bad = 0;
  for (const auto& r : records) {
    const auto label = parse_label(r.label_text);
    auto bytes = parse_bytes(r.data_hex);
    if (r.any_missing() || !label || !bytes || r.can_id_hex.size() > 8) {
      ++bad;
      continue;
    }
    CleanRecord c;
    c.timestamp = *r.timestamp;
    c.can_id = static_cast<std::uint32_t>(std::stoul(r.can_id_hex, nullptr, 16));
    c.dlc = static_cast<std::uint8_t>(std::min(*r.dlc, 255));
    c.payload = std::move(*bytes);
    c.label = *label;
    c.kind = r.kind.value_or(AttackKind::None);
    out.push_back(std::move(c));
  }
  if (dropped != nullptr) *dropped = bad;
  return out;
}

std::vector<CleanRecord> from_traffic(const TrafficLog& log) {
  std::vector<CleanRecord> out;
  out.reserve(log.size());
  for (const auto& r : log) {
    out.push_back(CleanRecord{r.timestamp, r.can_id, r.dlc(), r.payload, r.label, r.kind});
  }
  return out;
}

std::vector<stats::NamedColumn> correlation_columns(std::span<const RawRecord> records) {
  std::vector<stats::NamedColumn> cols{{"Timestamp", {}}, {"CAN_ID", {}}, {"DLC", {}}, {"Data_Field", {}}};
  for (const auto& r : records) {
    if (r.any_missing() || r.data_hex.empty()) continue;
    cols[0].values.push_back(*r.timestamp);
    cols[1].values.push_back(hex_to_dec(r.can_id_hex).to_double());
    cols[2].values.push_back(*r.dlc);
    cols[3].values.push_back(hex_to_dec(r.data_hex).to_double());
  }
  return cols;
}

double MinMax::apply(double x) const noexcept {
  if (!(max > min)) return 0.0;
  return std::clamp((x - min) / (max - min), 0.0, 1.0);
}

const MinMax* NormalizationParams::find(std::string_view name) const noexcept {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return &ranges[i];
  }
  return nullptr;
}

NormalizationParams fit_minmax(std::span<const stats::NamedColumn> columns) {
  NormalizationParams out;
  for (const auto& col : columns) {
    if (col.values.empty()) throw Error(Errc::EmptyColumn, "cannot fit min-max on empty column '" + col.name + "'");
    const auto [lo, hi] = std::minmax_element(col.values.begin(), col.values.end());
    out.names.push_back(col.name);
    out.ranges.push_back(MinMax{*lo, *hi});
  }
  return out;
}

NormalizationParams fit_record_normalization(std::span<const CleanRecord> train) {
  std::vector<stats::NamedColumn> cols{{"can_id", {}}, {"dlc", {}}};
  for (const auto& r : train) {
    cols[0].values.push_back(static_cast<double>(r.can_id));
    cols[1].values.push_back(static_cast<double>(r.dlc));
  }
  return fit_minmax(cols);
}

FeatureVector encode_record(const CleanRecord& record, const NormalizationParams& params) {
  const MinMax* id = params.find("can_id");
  const MinMax* dlc = params.find("dlc");
  if (id == nullptr || dlc == nullptr) throw Error(Errc::UnnormalizedInput, "normalization lacks can_id/dlc ranges");
  FeatureVector fv;
  fv.x[0] = id->apply(static_cast<double>(record.can_id));
  fv.x[1] = dlc->apply(static_cast<double>(record.dlc));
  const std::size_t n = std::min(record.payload.size(), kPayloadFeatures);
  for (std::size_t i = 0; i < n; ++i) fv.x[2 + i] = record.payload[i] / 255.0;
  fv.y = static_cast<std::uint8_t>(record.label);
  return fv;
}

SplitIndices split_indices(std::size_t n, double test_fraction, double val_fraction, std::uint64_t seed) {
  if (n == 0) throw Error(Errc::EmptyInput, "nothing to split");
  if (!(test_fraction >= 0.0 && test_fraction < 1.0) || !(val_fraction >= 0.0 && val_fraction < 1.0)) {
    throw Error(Errc::InvalidArgument, "split fractions must lie in [0, 1)");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  shuffle(order, rng);

  const auto n_test = static_cast<std::size_t>(std::floor(test_fraction * static_cast<double>(n)));
  const std::size_t n_block = n - n_test;
  const auto n_val = static_cast<std::size_t>(std::floor(val_fraction * static_cast<double>(n_block)));

  SplitIndices out;
  const auto test_end = order.begin() + static_cast<std::ptrdiff_t>(n_test);
  const auto val_end = test_end + static_cast<std::ptrdiff_t>(n_val);
  out.test.assign(order.begin(), test_end);
  out.validation.assign(test_end, val_end);
  out.train.assign(val_end, order.end());
  return out;
}

PreparedDataset split_dataset(std::span<const CleanRecord> records, const SplitConfig& cfg) {
  const auto idx = split_indices(records.size(), cfg.test_fraction, cfg.val_fraction, cfg.seed);
  std::vector<CleanRecord> train;
  train.reserve(idx.train.size());
  for (auto i : idx.train) train.push_back(records[i]);
  if (train.empty()) throw Error(Errc::EmptyInput, "training partition is empty");

  PreparedDataset ds;
  ds.seed = cfg.seed;
  ds.norm = fit_record_normalization(train);
  auto fill = [&](Partition& part, const std::vector<std::size_t>& which) {
    part.rows.reserve(which.size());
    part.kinds.reserve(which.size());
    for (auto i : which) {
      part.rows.push_back(encode_record(records[i], ds.norm));
      part.kinds.push_back(records[i].kind);
    }
  };
  fill(ds.train, idx.train);
  fill(ds.validation, idx.validation);
  fill(ds.test, idx.test);
  return ds;
}

PreparedDataset prepare(std::span<const std::vector<RawRecord>> logs, const PrepareConfig& cfg,
                        PrepareSummary* summary) {
  PrepareSummary s;
  // Cleaning.
  std::vector<RawRecord> cleaned;
  for (const auto& log : logs) {
    s.raw_rows += log.size();
    auto imputed = impute_missing(log, cfg.impute);
    cleaned.insert(cleaned.end(), std::make_move_iterator(imputed.begin()), std::make_move_iterator(imputed.end()));
  }
  s.after_imputation = cleaned.size();
  if (cfg.remove_dlc_outliers && cleaned.size() >= 25) {
    std::vector<double> dlc;
    dlc.reserve(cleaned.size());
    for (const auto& r : cleaned) dlc.push_back(static_cast<double>(*r.dlc));
    const auto flagged = stats::rosner_outliers(dlc, std::min(cfg.max_outliers, cleaned.size() - 2), cfg.outlier_alpha);
    const std::set<std::size_t> drop(flagged.begin(), flagged.end());
    std::vector<RawRecord> kept;
    kept.reserve(cleaned.size() - drop.size());
    for (std::size_t i = 0; i < cleaned.size(); ++i) {
      if (!drop.contains(i)) kept.push_back(std::move(cleaned[i]));
    }
    s.outliers_removed = drop.size();
    cleaned = std::move(kept);
  }
  // Integration.
  const auto records = integrate(cleaned);
  s.after_integration = records.size();
  if (records.empty()) throw Error(Errc::EmptyInput, "no usable rows after cleaning");
  // Transformation.
  auto ds = split_dataset(records, cfg.split);
  if (summary != nullptr) *summary = s;
  return ds;
}

}  // namespace canids::ingest
