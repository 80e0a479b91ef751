#include "canids/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>

#include "canids/canbus.hpp"
#include "canids/error.hpp"
#include "canids/rng.hpp"

namespace canids {

std::string_view attack_kind_name(AttackKind kind) noexcept {
  switch (kind) {
    case AttackKind::None: return "normal";
    case AttackKind::Flooding: return "flooding";
    case AttackKind::Fuzzing: return "fuzzing";
    case AttackKind::Spoofing: return "spoofing";
  }
  return "unknown";
}

std::optional<AttackKind> parse_attack_kind(std::string_view name) noexcept {
  for (int i = 0; i < kAttackKindCount; ++i) {
    const auto kind = static_cast<AttackKind>(i);
    if (attack_kind_name(kind) == name) return kind;
  }
  if (name == "none") return AttackKind::None;
  return std::nullopt;
}

}  // namespace canids

namespace canids::canbus {

std::optional<PayloadRule> parse_payload_rule(std::string_view name) noexcept {
  if (name == "constant") return PayloadRule::Constant;
  if (name == "counter") return PayloadRule::Counter;
  if (name == "random") return PayloadRule::Random;
  if (name == "sensor") return PayloadRule::Sensor;
  return std::nullopt;
}

void validate(const SimProfile& profile) {
  if (profile.ecu_schedule.empty()) throw Error(Errc::EmptySchedule, "profile has no ECUs");
  if (!(profile.duration > 0.0) || !std::isfinite(profile.duration)) {
    throw Error(Errc::InvalidProfile, "duration must be positive");
  }
  if (!(profile.jitter_fraction >= 0.0 && profile.jitter_fraction < 0.5)) {
    throw Error(Errc::InvalidProfile, "jitter fraction must lie in [0, 0.5)");
  }
  std::set<std::uint16_t> seen;
  for (const auto& ecu : profile.ecu_schedule) {
    if (!(ecu.period > 0.0) || !std::isfinite(ecu.period)) throw Error(Errc::InvalidProfile, "period must be positive");
    if (ecu.identifier > kMaxIdentifier) throw Error(Errc::InvalidProfile, "identifier exceeds 11 bits");
    if (ecu.base_payload.size() > kMaxDlc) throw Error(Errc::InvalidProfile, "payload longer than 8 bytes");
    if (!seen.insert(ecu.identifier).second) throw Error(Errc::InvalidProfile, "duplicate ECU identifier");
  }
}

std::size_t emission_count(double duration, double period) {
  return static_cast<std::size_t>(std::floor(duration / period * (1.0 + 1e-9)));
}

namespace {

std::vector<std::uint8_t> next_payload(const EcuSchedule& ecu, std::size_t k, Rng& rng) {
  std::vector<std::uint8_t> payload = ecu.base_payload;
  switch (ecu.rule) {
    case PayloadRule::Constant: break;
    case PayloadRule::Counter:
      if (!payload.empty()) payload[0] = static_cast<std::uint8_t>(payload[0] + k);
      break;
    case PayloadRule::Random:
      for (auto& b : payload) b = static_cast<std::uint8_t>(uniform_below(rng, 256));
      break;
    case PayloadRule::Sensor:
      if (payload.size() >= 2) {
        const unsigned base = (static_cast<unsigned>(payload[0]) << 8) | payload[1];
        const unsigned reading = (base + static_cast<unsigned>(uniform_below(rng, 64))) & 0xFFFFu;
        payload[0] = static_cast<std::uint8_t>(reading >> 8);
        payload[1] = static_cast<std::uint8_t>(reading & 0xFF);
      }
      break;
  }
  return payload;
}

void sort_by_time(TrafficLog& log) {
  std::stable_sort(log.begin(), log.end(),
                   [](const TrafficRecord& a, const TrafficRecord& b) { return a.timestamp < b.timestamp; });
}

}  // namespace

TrafficLog generate_traffic(const SimProfile& profile) {
  validate(profile);
  Rng rng(profile.seed);
  TrafficLog log;
  for (const auto& ecu : profile.ecu_schedule) {
    const std::size_t count = emission_count(profile.duration, ecu.period);
    for (std::size_t k = 1; k <= count; ++k) {
      double u = 0.0;
      if (profile.jitter_fraction > 0.0) u = uniform_real(rng, -profile.jitter_fraction, profile.jitter_fraction);
      TrafficRecord rec;
      rec.timestamp = ecu.period * (static_cast<double>(k) + u);
      rec.can_id = ecu.identifier;
      rec.payload = next_payload(ecu, k, rng);
      log.push_back(std::move(rec));
    }
  }
  sort_by_time(log);
  return log;
}

std::size_t injected_count(const AttackSpec& spec) {
  return static_cast<std::size_t>(std::floor(spec.rate * (spec.end - spec.start) * (1.0 + 1e-12)));
}

TrafficLog inject_attack(const TrafficLog& log, const AttackSpec& spec, std::optional<double> horizon) {
  if (!(spec.rate > 0.0) || !std::isfinite(spec.rate)) throw Error(Errc::InvalidAttackSpec, "rate must be positive");
  if (!(spec.start < spec.end)) throw Error(Errc::InvalidAttackSpec, "start must precede end");
  if (spec.kind == AttackKind::None) throw Error(Errc::InvalidAttackSpec, "attack kind required");
  if (spec.kind == AttackKind::Spoofing && spec.spoof_targets.empty()) {
    throw Error(Errc::EmptySpoofTargets, "spoofing requires at least one target identifier");
  }
  for (auto id : spec.spoof_targets) {
    if (id > kMaxIdentifier) throw Error(Errc::InvalidAttackSpec, "spoof target exceeds 11 bits");
  }
  if (log.empty() && !horizon) throw Error(Errc::WindowOutOfRange, "empty log has no span");
  const double span_end = horizon ? *horizon : log.back().timestamp;
  if (spec.start < 0.0 || spec.end > span_end) throw Error(Errc::WindowOutOfRange, "attack window outside log span");

  // Normal payload history per spoof target, in time order.
  std::map<std::uint16_t, std::vector<std::size_t>> history;
  if (spec.kind == AttackKind::Spoofing) {
    for (auto id : spec.spoof_targets) history[id];
    for (std::size_t i = 0; i < log.size(); ++i) {
      if (log[i].label != Label::Normal) continue;
      if (auto it = history.find(log[i].can_id); it != history.end()) it->second.push_back(i);
    }
  }

  Rng rng(spec.seed);
  const std::size_t count = injected_count(spec);
  TrafficLog injected;
  injected.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    TrafficRecord rec;
    rec.timestamp = spec.start + static_cast<double>(i) / spec.rate;
    rec.label = Label::Attack;
    rec.kind = spec.kind;
    switch (spec.kind) {
      case AttackKind::Flooding:
        rec.can_id = 0x000;
        rec.payload.assign(8, 0x00);
        break;
      case AttackKind::Fuzzing: {
        rec.can_id = static_cast<std::uint16_t>(uniform_below(rng, kMaxIdentifier + 1));
        const auto dlc = uniform_below(rng, kMaxDlc + 1);
        rec.payload.resize(dlc);
        for (auto& b : rec.payload) b = static_cast<std::uint8_t>(uniform_below(rng, 256));
        break;
      }
      case AttackKind::Spoofing: {
        rec.can_id = spec.spoof_targets[uniform_below(rng, spec.spoof_targets.size())];
        const auto& seen = history[rec.can_id];
        const auto after = std::upper_bound(seen.begin(), seen.end(), rec.timestamp,
                                            [&](double t, std::size_t idx) { return t < log[idx].timestamp; });
        if (after != seen.begin() && !log[*std::prev(after)].payload.empty()) {
          rec.payload = log[*std::prev(after)].payload;
        } else {
          rec.payload.resize(8);
          for (auto& b : rec.payload) b = static_cast<std::uint8_t>(uniform_below(rng, 256));
        }
        const auto pos = uniform_below(rng, rec.payload.size());
        rec.payload[pos] ^= static_cast<std::uint8_t>(1 + uniform_below(rng, 255));
        break;
      }
      case AttackKind::None: break;
    }
    injected.push_back(std::move(rec));
  }

  TrafficLog merged;
  merged.reserve(log.size() + injected.size());
  std::merge(log.begin(), log.end(), injected.begin(), injected.end(), std::back_inserter(merged),
             [](const TrafficRecord& a, const TrafficRecord& b) { return a.timestamp < b.timestamp; });
  return merged;
}

std::string format_can_id(std::uint16_t id) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%04X", static_cast<unsigned>(id));
  return buf;
}

std::string format_payload(const std::vector<std::uint8_t>& payload) {
  std::string out;
  out.reserve(payload.size() * 3);
  char buf[4];
  for (std::size_t i = 0; i < payload.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%02X", static_cast<unsigned>(payload[i]));
    if (i != 0) out.push_back(' ');
    out += buf;
  }
  return out;
}

void write_log(std::ostream& out, const TrafficLog& log, bool with_kind) {
  out << "Timestamp,CAN_ID,DLC,Data_Field,Label";
  if (with_kind) out << ",Attack_Kind";
  out << '\n';
  char ts[40];
  for (const auto& rec : log) {
    std::snprintf(ts, sizeof ts, "%.6f", rec.timestamp);
    out << ts << ',' << format_can_id(rec.can_id) << ',' << static_cast<unsigned>(rec.dlc()) << ','
        << format_payload(rec.payload) << ',' << static_cast<unsigned>(rec.label);
    if (with_kind) out << ',' << attack_kind_name(rec.kind);
    out << '\n';
  }
}

}  // namespace canids::canbus
