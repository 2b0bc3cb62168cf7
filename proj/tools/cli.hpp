#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace qgrm::cli {

inline constexpr std::uint64_t kDefaultSeed = 12345;
inline constexpr const char* kSeedEnv = "QGRM_SEED";

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitUsage = 2,
  kExitResource = 3,
  kExitIo = 4,
};

// Comma-separated labels when a comma is present, otherwise one label per character.
std::vector<std::string> parse_word(const std::string& text);

// Runs the tool on `args` (without the program name). Results go to `out` or
// the --out file; the run header, warnings and errors go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qgrm::cli
