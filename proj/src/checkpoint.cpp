#include "canids/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "canids/binio.hpp"
#include "canids/error.hpp"

namespace canids::checkpoint {
namespace {

constexpr std::size_t kMagicLen = 8;
constexpr std::uint64_t kMaxArray = std::uint64_t{1} << 32;

[[noreturn]] void corrupt(const std::string& why) { throw Error(Errc::CorruptCheckpoint, why); }

void put_string(std::ostream& out, std::string_view s) {
  binio::put_u64(out, s.size());
  binio::put_bytes(out, s);
}

std::string get_string(std::istream& in) {
  std::uint64_t n;
  if (!binio::get_u64(in, n) || n > (1u << 20)) corrupt("bad string length");
  std::string s;
  if (!binio::get_bytes(in, s, n)) corrupt("truncated string");
  return s;
}

void put_array(std::ostream& out, const std::vector<double>& v) {
  binio::put_u64(out, v.size());
  binio::put_f64s(out, v);
}

void get_array(std::istream& in, std::vector<double>& v) {
  std::uint64_t n;
  if (!binio::get_u64(in, n) || n > kMaxArray) corrupt("bad array length");
  if (n != v.size()) corrupt("parameter array size disagrees with architecture");
  for (auto& x : v) {
    if (!binio::get_f64(in, x)) corrupt("truncated parameter array");
  }
}

}  // namespace

std::uint64_t digest(std::string_view config_text) { return binio::fnv1a(config_text); }

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  std::ostringstream body(std::ios::binary);
  binio::put_bytes(body, std::string_view(kMagic, kMagicLen));
  binio::put_u8(body, kVersion);
  put_string(body, ckpt.model.descriptor());
  for (const auto& p : ckpt.model.params()) {
    put_array(body, p.weights);
    put_array(body, p.biases);
  }
  binio::put_u64(body, ckpt.norm.ranges.size());
  for (std::size_t i = 0; i < ckpt.norm.ranges.size(); ++i) {
    put_string(body, i < ckpt.norm.names.size() ? ckpt.norm.names[i] : "");
    binio::put_f64(body, ckpt.norm.ranges[i].min);
    binio::put_f64(body, ckpt.norm.ranges[i].max);
  }
  binio::put_u64(body, ckpt.seed);
  binio::put_u64(body, ckpt.config_digest);
  const std::string bytes = std::move(body).str();
  binio::put_bytes(out, bytes);
  binio::put_u64(out, binio::fnv1a(bytes));
}

Checkpoint read_checkpoint(std::istream& in) {
  const std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (all.size() < kMagicLen + 1 + 8) corrupt("file too short");
  if (all.compare(0, kMagicLen, kMagic, kMagicLen) != 0) corrupt("bad magic");
  if (static_cast<std::uint8_t>(all[kMagicLen]) != kVersion) {
    throw Error(Errc::VersionMismatch, "checkpoint version " + std::to_string(static_cast<unsigned char>(all[kMagicLen])) +
                                           ", expected " + std::to_string(kVersion));
  }
  const std::string_view body(all.data(), all.size() - 8);
  std::istringstream tail(all.substr(all.size() - 8), std::ios::binary);
  std::uint64_t stored = 0;
  binio::get_u64(tail, stored);
  if (stored != binio::fnv1a(body)) corrupt("checksum mismatch (truncated or modified file)");

  std::istringstream s(std::string(body.substr(kMagicLen + 1)), std::ios::binary);
  Checkpoint ckpt;
  try {
    ckpt.model = nn::Network::from_descriptor(get_string(s));
  } catch (const Error& e) {
    if (e.code() == Errc::CorruptCheckpoint) throw;
    corrupt(std::string("bad architecture descriptor: ") + e.what());
  }
  for (auto& p : ckpt.model.params()) {
    get_array(s, p.weights);
    get_array(s, p.biases);
  }
  std::uint64_t n_norm;
  if (!binio::get_u64(s, n_norm) || n_norm > 1024) corrupt("bad normalization block");
  for (std::uint64_t i = 0; i < n_norm; ++i) {
    ckpt.norm.names.push_back(get_string(s));
    ingest::MinMax r;
    if (!binio::get_f64(s, r.min) || !binio::get_f64(s, r.max)) corrupt("truncated normalization block");
    ckpt.norm.ranges.push_back(r);
  }
  if (!binio::get_u64(s, ckpt.seed) || !binio::get_u64(s, ckpt.config_digest)) corrupt("truncated trailer");
  if (s.peek() != std::char_traits<char>::eof()) corrupt("trailing bytes");
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoFailure, "cannot open " + path.string() + " for writing");
  write_checkpoint(out, ckpt);
  if (!out) throw Error(Errc::IoFailure, "write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  return read_checkpoint(in);
}

}  // namespace canids::checkpoint
