#include <doctest.h>

#include <array>
#include <set>
#include <sstream>

#include "canids/canbus.hpp"
#include "canids/error.hpp"
#include "canids/rng.hpp"
#include "canids/traffic.hpp"

using namespace canids;
using namespace canids::canbus;

namespace {

// Polynomial long division of bits(x) * x^15 by the full 16-bit generator.
std::uint16_t crc_long_division(const std::vector<std::uint8_t>& bits) {
  std::vector<std::uint8_t> work(bits);
  work.resize(bits.size() + 15, 0);
  const std::uint32_t gen = 0x8000 | kCrc15Generator;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (!work[i]) continue;
    for (int j = 0; j < 16; ++j) work[i + j] ^= static_cast<std::uint8_t>((gen >> (15 - j)) & 1);
  }
  std::uint16_t r = 0;
  for (std::size_t i = bits.size(); i < work.size(); ++i) r = static_cast<std::uint16_t>((r << 1) | work[i]);
  return r;
}

// Table-driven variant consuming four message bits per step.
std::uint16_t crc_nibble_table(const std::vector<std::uint8_t>& bits) {
  std::array<std::uint16_t, 16> table{};
  for (std::uint32_t n = 0; n < 16; ++n) {
    std::uint32_t r = n << 11;
    for (int i = 0; i < 4; ++i) r = (r & 0x4000) ? ((r << 1) ^ kCrc15Generator) : (r << 1);
    table[n] = static_cast<std::uint16_t>(r & 0x7FFF);
  }
  std::uint32_t crc = 0;
  std::size_t i = 0;
  for (; i + 4 <= bits.size(); i += 4) {
    const std::uint32_t nib = (bits[i] << 3) | (bits[i + 1] << 2) | (bits[i + 2] << 1) | bits[i + 3];
    crc = ((crc << 4) & 0x7FFF) ^ table[((crc >> 11) ^ nib) & 0xF];
  }
  for (; i < bits.size(); ++i) {
    const bool top = ((crc >> 14) & 1) ^ bits[i];
    crc = (crc << 1) & 0x7FFF;
    if (top) crc ^= kCrc15Generator;
  }
  return static_cast<std::uint16_t>(crc);
}

std::vector<std::uint8_t> header_and_data_bits(const CanFrame& f) {
  const auto bits = encode_frame(f);
  return {bits.begin(), bits.begin() + static_cast<std::ptrdiff_t>(kHeaderBits + 8u * f.dlc)};
}

CanFrame random_frame(Rng& rng) {
  std::vector<std::uint8_t> payload(uniform_below(rng, 9));
  for (auto& b : payload) b = static_cast<std::uint8_t>(uniform_below(rng, 256));
  auto f = CanFrame::data(static_cast<std::uint16_t>(uniform_below(rng, 2048)), std::move(payload));
  f.rtr = uniform_below(rng, 2) == 1;
  f.reserved = uniform_below(rng, 2) == 1;
  f.crc = frame_crc(f);
  return f;
}

template <typename Fn>
Errc code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::IoFailure;
}

SimProfile three_ecu_profile(double duration, double jitter, std::uint64_t seed) {
  SimProfile p;
  p.duration = duration;
  p.jitter_fraction = jitter;
  p.seed = seed;
  p.ecu_schedule = {{0x130, 0.01, PayloadRule::Counter, {0, 0x80, 0x10, 0xFF, 0, 0x40, 0x7F, 0x6B}},
                    {0x2B0, 0.02, PayloadRule::Sensor, {0x0A, 0, 0, 7, 0, 0, 0, 0}},
                    {0x316, 0.07, PayloadRule::Random, {0, 0, 0, 0}}};
  return p;
}

}  // namespace

TEST_SUITE("canbus") {
  TEST_CASE("crc15 on fixed inputs") {
    CHECK(crc15(std::vector<std::uint8_t>(16, 0)) == 0x0000);
    // x^0 * x^15 mod G: the generator's low 15 bits.
    CHECK(crc15(std::vector<std::uint8_t>{1}) == 0x4599);
    std::vector<std::uint8_t> leading_zeros(15, 0);
    leading_zeros.push_back(1);
    CHECK(crc15(leading_zeros) == 0x4599);
    // A 1 followed by fifteen zeros is x^30 mod G under the shift-register definition.
    std::vector<std::uint8_t> one_then_zeros(16, 0);
    one_then_zeros[0] = 1;
    CHECK(crc15(one_then_zeros) == crc_long_division(one_then_zeros));
  }

  TEST_CASE("crc15 agrees with two independent oracles") {
    const auto f = CanFrame::data(0x130, {0xAB, 0xCD});
    const auto bits = header_and_data_bits(f);
    CHECK(bits.size() == 19 + 16);
    CHECK(crc15(bits) == crc_nibble_table(bits));
    CHECK(crc15(bits) == crc_long_division(bits));
    CHECK(f.crc == crc15(bits));
    Rng rng(3);
    for (int i = 0; i < 300; ++i) {
      std::vector<std::uint8_t> m(1 + uniform_below(rng, 120));
      for (auto& b : m) b = static_cast<std::uint8_t>(uniform_below(rng, 2));
      REQUIRE(crc15(m) == crc_long_division(m));
      REQUIRE(crc15(m) == crc_nibble_table(m));
    }
  }

  TEST_CASE("frame lengths and field layout") {
    CHECK(encode_frame(CanFrame::data(0x7FF, std::vector<std::uint8_t>(8, 0xFF))).size() == 108);
    CHECK(encode_frame(CanFrame::data(0x123, {})).size() == 44);
    for (std::uint8_t dlc = 0; dlc <= 8; ++dlc) CHECK(frame_bit_length(dlc) == 44u + 8u * dlc);
    const auto bits = encode_frame(CanFrame::data(0x000, {1, 2}));
    for (int i = 0; i < 12; ++i) CHECK(bits[i] == 0);
    const std::size_t n = bits.size();
    CHECK(bits[n - 10] == 1);  // CRC delimiter
    CHECK(bits[n - 9] == 0);   // ACK slot, dominant
    CHECK(bits[n - 8] == 1);   // ACK delimiter
    for (std::size_t i = n - 7; i < n; ++i) CHECK(bits[i] == 1);
  }

  TEST_CASE("validate rejects out-of-range frames") {
    CanFrame f = CanFrame::data(0x100, {1});
    f.identifier = 0x800;
    CHECK(code_of([&] { validate(f); }) == Errc::MalformedFrame);
    f = CanFrame::data(0x100, {1});
    f.ide = true;
    CHECK(code_of([&] { encode_frame(f); }) == Errc::MalformedFrame);
    f = CanFrame::data(0x100, {1});
    f.dlc = 2;
    CHECK(code_of([&] { encode_frame(f); }) == Errc::MalformedFrame);
  }

  TEST_CASE("1000 seeded random frames round-trip") {
    Rng rng(2024);
    for (int i = 0; i < 1000; ++i) {
      const auto f = random_frame(rng);
      REQUIRE(decode_frame(encode_frame(f)) == f);
    }
  }

  TEST_CASE("every single-bit flip is detected for each dlc") {
    Rng rng(5);
    for (std::uint8_t dlc = 0; dlc <= 8; ++dlc) {
      std::vector<std::uint8_t> payload(dlc);
      for (auto& b : payload) b = static_cast<std::uint8_t>(uniform_below(rng, 256));
      const auto bits = encode_frame(CanFrame::data(static_cast<std::uint16_t>(0x2B0 + dlc), payload));
      for (std::size_t i = 0; i < bits.size(); ++i) {
        auto bad = bits;
        bad[i] ^= 1;
        const auto code = code_of([&] { decode_frame(bad); });
        REQUIRE((code == Errc::CrcMismatch || code == Errc::MalformedFrame));
      }
    }
  }

  TEST_CASE("decode rejects truncation and corrupt CRC") {
    auto bits = encode_frame(CanFrame::data(0x130, {0xAB, 0xCD}));
    auto truncated = std::vector<std::uint8_t>(bits.begin(), bits.begin() + 43);
    CHECK(code_of([&] { decode_frame(truncated); }) == Errc::MalformedFrame);
    bits[19 + 3] ^= 1;  // data bit
    CHECK(code_of([&] { decode_frame(bits); }) == Errc::CrcMismatch);
  }

  TEST_CASE("generate_traffic without jitter") {
    SimProfile p;
    p.duration = 1.0;
    p.ecu_schedule = {{0x100, 0.1, PayloadRule::Constant, {1, 2, 3}}};
    const auto log = generate_traffic(p);
    REQUIRE(log.size() == 10);
    for (std::size_t k = 0; k < log.size(); ++k) {
      CHECK(log[k].timestamp == doctest::Approx(0.1 * static_cast<double>(k + 1)).epsilon(1e-12));
      CHECK(log[k].label == Label::Normal);
      CHECK(log[k].payload == std::vector<std::uint8_t>{1, 2, 3});
    }
  }

  TEST_CASE("generate_traffic counts, ordering and determinism") {
    const auto p = three_ecu_profile(60.0, 0.05, 7);
    const auto log = generate_traffic(p);
    std::size_t expected = 0;
    for (const auto& e : p.ecu_schedule) expected += static_cast<std::size_t>(std::floor(p.duration / e.period + 1e-9));
    CHECK(log.size() == expected);
    CHECK(log.size() == 6000 + 3000 + 857);
    for (std::size_t i = 1; i < log.size(); ++i) REQUIRE(log[i - 1].timestamp <= log[i].timestamp);
    std::ostringstream a, b;
    write_log(a, log);
    write_log(b, generate_traffic(p));
    CHECK(a.str() == b.str());
    std::ostringstream c;
    write_log(c, generate_traffic(three_ecu_profile(60.0, 0.05, 8)));
    CHECK(a.str() != c.str());
  }

  TEST_CASE("profile validation") {
    SimProfile p;
    p.duration = 1.0;
    CHECK(code_of([&] { generate_traffic(p); }) == Errc::EmptySchedule);
    p.ecu_schedule = {{0x100, 0.0, PayloadRule::Constant, {}}};
    CHECK(code_of([&] { generate_traffic(p); }) == Errc::InvalidProfile);
    p.ecu_schedule = {{0x100, 0.1, PayloadRule::Constant, {}}, {0x100, 0.2, PayloadRule::Constant, {}}};
    CHECK(code_of([&] { generate_traffic(p); }) == Errc::InvalidProfile);
  }

  TEST_CASE("flooding injection") {
    const auto base = generate_traffic(three_ecu_profile(5.0, 0.05, 1));
    AttackSpec spec{AttackKind::Flooding, 1.0, 3.0, 100.0, {}, 9};
    const auto out = inject_attack(base, spec);
    CHECK(out.size() == base.size() + 200);
    std::size_t injected = 0;
    for (const auto& r : out) {
      if (r.label != Label::Attack) continue;
      ++injected;
      CHECK(r.can_id == 0x000);
      CHECK(r.kind == AttackKind::Flooding);
    }
    CHECK(injected == 200);
    // Originals preserved verbatim and in order.
    TrafficLog originals;
    for (const auto& r : out)
      if (r.label == Label::Normal) originals.push_back(r);
    CHECK(originals == base);
    for (std::size_t i = 1; i < out.size(); ++i) REQUIRE(out[i - 1].timestamp <= out[i].timestamp);
  }

  TEST_CASE("spoofing stays within the targets and mimics a legitimate payload") {
    const auto base = generate_traffic(three_ecu_profile(5.0, 0.0, 2));
    AttackSpec spec{AttackKind::Spoofing, 1.0, 4.0, 50.0, {0x2B0, 0x130}, 4};
    const auto out = inject_attack(base, spec);
    std::size_t injected = 0;
    for (const auto& r : out) {
      if (r.label != Label::Attack) continue;
      ++injected;
      CHECK((r.can_id == 0x2B0 || r.can_id == 0x130));
      CHECK(r.payload.size() == 8);
    }
    CHECK(injected == 150);
    spec.spoof_targets.clear();
    CHECK(code_of([&] { inject_attack(base, spec); }) == Errc::EmptySpoofTargets);
  }

  TEST_CASE("fuzzing draws replay from the seed") {
    const auto base = generate_traffic(three_ecu_profile(3.0, 0.05, 3));
    AttackSpec spec{AttackKind::Fuzzing, 1.0, 2.0, 50.0, {}, 77};
    const auto out = inject_attack(base, spec);
    std::multiset<std::uint16_t> got;
    std::vector<std::vector<std::uint8_t>> payloads;
    for (const auto& r : out)
      if (r.label == Label::Attack) {
        got.insert(r.can_id);
        payloads.push_back(r.payload);
      }
    REQUIRE(got.size() == 50);
    Rng rng(77);
    std::multiset<std::uint16_t> expected;
    std::vector<std::vector<std::uint8_t>> expected_payloads;
    for (int i = 0; i < 50; ++i) {
      expected.insert(static_cast<std::uint16_t>(uniform_below(rng, 2048)));
      std::vector<std::uint8_t> p(uniform_below(rng, 9));
      for (auto& b : p) b = static_cast<std::uint8_t>(uniform_below(rng, 256));
      expected_payloads.push_back(p);
    }
    CHECK(got == expected);
    std::sort(payloads.begin(), payloads.end());
    std::sort(expected_payloads.begin(), expected_payloads.end());
    CHECK(payloads == expected_payloads);
  }

  TEST_CASE("attack windows are validated") {
    const auto base = generate_traffic(three_ecu_profile(3.0, 0.0, 3));
    CHECK(code_of([&] { inject_attack(base, {AttackKind::Fuzzing, 1.0, 1.0, 50.0, {}, 1}); }) ==
          Errc::InvalidAttackSpec);
    CHECK(code_of([&] { inject_attack(base, {AttackKind::Fuzzing, 1.0, 2.0, 0.0, {}, 1}); }) ==
          Errc::InvalidAttackSpec);
    CHECK(code_of([&] { inject_attack(base, {AttackKind::Flooding, 2.0, 9.0, 10.0, {}, 1}); }) ==
          Errc::WindowOutOfRange);
    CHECK(code_of([&] { inject_attack(base, {AttackKind::Flooding, -1.0, 1.0, 10.0, {}, 1}); }) ==
          Errc::WindowOutOfRange);
  }

  TEST_CASE("log format") {
    TrafficLog log{{0.5, 0x130, {0x80, 0x7F, 0x00, 0x73}, Label::Attack, AttackKind::Spoofing},
                   {1.25, 0x002, {}, Label::Normal, AttackKind::None}};
    std::ostringstream out;
    write_log(out, log);
    CHECK(out.str() ==
          "Timestamp,CAN_ID,DLC,Data_Field,Label\n"
          "0.500000,0130,4,80 7F 00 73,1\n"
          "1.250000,0002,0,,0\n");
    std::ostringstream with_kind;
    write_log(with_kind, log, true);
    CHECK(with_kind.str().find(",1,spoofing\n") != std::string::npos);
  }
}
