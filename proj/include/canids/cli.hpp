#pragma once

// Batch command-line surface:
//   simulate | prepare | train | evaluate | transfer | compare | gradcheck
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "canids/traffic.hpp"

namespace canids::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

int run_command(int argc, char** argv);
/// args excludes the program name.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Profile file: key=value lines (`#` comments) with keys duration, jitter,
/// seed and one `ecu=<hex id>,<period s>,<rule>,<hex bytes>` per ECU.
canbus::SimProfile parse_profile(std::istream& in);

/// `kind:start:end:rate[:id/id/...]`, ids in hex. Throws InvalidAttackSpec.
canbus::AttackSpec parse_attack(std::string_view text);

/// key=value lines to `--key=value` tokens, in file order.
std::vector<std::string> config_tokens(std::istream& in);

}  // namespace canids::cli
