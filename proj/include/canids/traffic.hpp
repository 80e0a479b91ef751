#pragma once

// Labeled CAN traffic logs: a periodic-with-jitter normal-traffic simulator,
// injection of flooding / fuzzing / spoofing attacks, and emission in the
// five-column log format `Timestamp,CAN_ID,DLC,Data_Field,Label`.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace canids {

enum class Label : std::uint8_t { Normal = 0, Attack = 1 };

/// Simulator-side provenance of a record. Real logs carry only Label.
enum class AttackKind : std::uint8_t { None = 0, Flooding = 1, Fuzzing = 2, Spoofing = 3 };

inline constexpr int kAttackKindCount = 4;

std::string_view attack_kind_name(AttackKind kind) noexcept;
std::optional<AttackKind> parse_attack_kind(std::string_view name) noexcept;

struct TrafficRecord {
  double timestamp = 0.0;
  std::uint16_t can_id = 0;
  std::vector<std::uint8_t> payload;  // dlc == payload.size()
  Label label = Label::Normal;
  AttackKind kind = AttackKind::None;

  std::uint8_t dlc() const noexcept { return static_cast<std::uint8_t>(payload.size()); }
  bool operator==(const TrafficRecord&) const = default;
};

using TrafficLog = std::vector<TrafficRecord>;

}  // namespace canids

namespace canids::canbus {

enum class PayloadRule {
  Constant,  // base payload every time
  Counter,   // base payload with byte 0 incrementing per emission
  Random,    // fresh uniform bytes
  Sensor,    // bytes 0-1 a slowly drifting big-endian 16-bit reading, rest constant
};

std::optional<PayloadRule> parse_payload_rule(std::string_view name) noexcept;

struct EcuSchedule {
  std::uint16_t identifier = 0;
  double period = 0.0;  // seconds
  PayloadRule rule = PayloadRule::Constant;
  std::vector<std::uint8_t> base_payload;  // also fixes dlc
};

struct SimProfile {
  std::vector<EcuSchedule> ecu_schedule;
  double duration = 0.0;
  double jitter_fraction = 0.0;  // [0, 0.5)
  std::uint64_t seed = 0;
};

/// Throws EmptySchedule or InvalidProfile.
void validate(const SimProfile& profile);

/// Emission count of one ECU: floor(duration / period), with a 1e-9 relative
/// guard so exact multiples are not lost to rounding.
std::size_t emission_count(double duration, double period);

/// ECU i emits its k-th frame (k = 1..emission_count) at period * (k + u),
/// u uniform in [-jitter, +jitter). Draw order per emission: jitter, then
/// payload bytes. All records are Normal; output is stably sorted by time.
TrafficLog generate_traffic(const SimProfile& profile);

struct AttackSpec {
  AttackKind kind = AttackKind::Flooding;
  double start = 0.0;
  double end = 0.0;
  double rate = 0.0;  // frames per second
  std::vector<std::uint16_t> spoof_targets;
  std::uint64_t seed = 0;
};

/// Number of frames an attack window injects: floor(rate * (end - start)).
std::size_t injected_count(const AttackSpec& spec);

/// Merges injected frames into `log`, emitted at start + i / rate for
/// i in [0, injected_count). Flooding sends ID 0x000 with eight zero bytes.
/// Fuzzing draws id (mod 2048), dlc (mod 9), then each byte (mod 256) from a
/// generator seeded with spec.seed. Spoofing draws a target (mod n_targets),
/// copies the latest Normal payload seen for it at or before the injection time
/// (eight random bytes if none), then XORs byte (mod dlc) with 1 + (draw mod 255).
/// Originals are preserved verbatim and precede injected frames on equal time.
/// The window must lie in [0, horizon]; horizon defaults to the last timestamp.
TrafficLog inject_attack(const TrafficLog& log, const AttackSpec& spec,
                         std::optional<double> horizon = std::nullopt);

/// Writes the header and one row per record. `with_kind` appends a sixth
/// `Attack_Kind` column carrying simulator provenance.
void write_log(std::ostream& out, const TrafficLog& log, bool with_kind = false);

std::string format_can_id(std::uint16_t id);
std::string format_payload(const std::vector<std::uint8_t>& payload);

}  // namespace canids::canbus
