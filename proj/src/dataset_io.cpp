#include "canids/dataset_io.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "canids/binio.hpp"
#include "canids/error.hpp"

namespace canids::ingest {
namespace {

constexpr std::string_view kKindsTag = "KINDS";

[[noreturn]] void corrupt(const std::string& why) { throw Error(Errc::CorruptDataset, why); }

void write_partition(std::ostream& out, const Partition& part) {
  for (const auto& row : part.rows) binio::put_f64s(out, row.x);
  for (const auto& row : part.rows) binio::put_u8(out, row.y);
}

void read_partition(std::istream& in, Partition& part, std::size_t n) {
  part.rows.resize(n);
  for (auto& row : part.rows) {
    for (auto& v : row.x) {
      if (!binio::get_f64(in, v)) corrupt("truncated feature matrix");
    }
  }
  for (auto& row : part.rows) {
    if (!binio::get_u8(in, row.y)) corrupt("truncated label array");
    if (row.y > 1) corrupt("label byte outside {0,1}");
  }
  part.kinds.assign(n, AttackKind::None);
}

std::string one_line(std::string s) {
  for (auto& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

void write_dataset(std::ostream& out, const PreparedDataset& ds) {
  binio::put_bytes(out, std::string_view(kDatasetMagic, 7));
  binio::put_u64(out, ds.train.size());
  binio::put_u64(out, ds.validation.size());
  binio::put_u64(out, ds.test.size());
  binio::put_u64(out, kFeatureWidth);
  write_partition(out, ds.train);
  write_partition(out, ds.validation);
  write_partition(out, ds.test);
  binio::put_u64(out, ds.norm.ranges.size());
  for (const auto& r : ds.norm.ranges) {
    binio::put_f64(out, r.min);
    binio::put_f64(out, r.max);
  }
  binio::put_bytes(out, kKindsTag);
  for (const Partition* p : {&ds.train, &ds.validation, &ds.test}) {
    for (auto k : p->kinds) binio::put_u8(out, static_cast<std::uint8_t>(k));
  }
}

PreparedDataset read_dataset(std::istream& in) {
  std::string magic;
  if (!binio::get_bytes(in, magic, 7) || magic != std::string_view(kDatasetMagic, 7)) corrupt("bad magic");
  std::uint64_t n_train, n_val, n_test, width;
  if (!binio::get_u64(in, n_train) || !binio::get_u64(in, n_val) || !binio::get_u64(in, n_test) ||
      !binio::get_u64(in, width)) {
    corrupt("truncated header");
  }
  if (width != kFeatureWidth) corrupt("feature width " + std::to_string(width) + " != 16");
  constexpr std::uint64_t kSane = std::uint64_t{1} << 40;
  if (n_train > kSane || n_val > kSane || n_test > kSane) corrupt("implausible partition size");

  PreparedDataset ds;
  read_partition(in, ds.train, n_train);
  read_partition(in, ds.validation, n_val);
  read_partition(in, ds.test, n_test);
  std::uint64_t n_norm;
  if (!binio::get_u64(in, n_norm) || n_norm > 1024) corrupt("truncated normalization block");
  for (std::uint64_t i = 0; i < n_norm; ++i) {
    MinMax r;
    if (!binio::get_f64(in, r.min) || !binio::get_f64(in, r.max)) corrupt("truncated normalization block");
    if (!(r.max >= r.min)) corrupt("normalization range with max < min");
    ds.norm.ranges.push_back(r);
    ds.norm.names.push_back(i == 0 ? "can_id" : i == 1 ? "dlc" : "feature" + std::to_string(i));
  }
  std::string tag;
  if (binio::get_bytes(in, tag, kKindsTag.size())) {
    if (tag != kKindsTag) corrupt("unknown trailing section");
    for (Partition* p : {&ds.train, &ds.validation, &ds.test}) {
      for (auto& k : p->kinds) {
        std::uint8_t v;
        if (!binio::get_u8(in, v) || v >= kAttackKindCount) corrupt("truncated kinds section");
        k = static_cast<AttackKind>(v);
      }
    }
  }
  return ds;
}

std::filesystem::path manifest_path(const std::filesystem::path& dataset) {
  auto p = dataset;
  p += ".manifest";
  return p;
}

void save_dataset(const std::filesystem::path& path, const PreparedDataset& ds) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::IoFailure, "cannot open " + path.string() + " for writing");
    write_dataset(out, ds);
    if (!out) throw Error(Errc::IoFailure, "write failed: " + path.string());
  }
  std::ofstream man(manifest_path(path));
  if (!man) throw Error(Errc::IoFailure, "cannot write manifest for " + path.string());
  man << "format=CANIDS1\n";
  man << "provenance=" << one_line(ds.provenance) << '\n';
  man << "seed=" << ds.seed << '\n';
  man << "train_rows=" << ds.train.size() << '\n';
  man << "validation_rows=" << ds.validation.size() << '\n';
  man << "test_rows=" << ds.test.size() << '\n';
  for (std::size_t i = 0; i < ds.norm.names.size(); ++i) {
    man << "norm." << i << ".name=" << ds.norm.names[i] << '\n';
  }
}

PreparedDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  auto ds = read_dataset(in);
  std::ifstream man(manifest_path(path));
  std::string line;
  while (man && std::getline(man, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const auto key = line.substr(0, eq);
    const auto value = line.substr(eq + 1);
    if (key == "provenance") {
      ds.provenance = value;
    } else if (key == "seed") {
      ds.seed = std::stoull(value);
    } else if (key.starts_with("norm.") && key.ends_with(".name")) {
      const auto idx = std::stoul(key.substr(5, key.size() - 10));
      if (idx < ds.norm.names.size()) ds.norm.names[idx] = value;
    }
  }
  return ds;
}

}  // namespace canids::ingest
