#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>

#include "grassdisagg/random.hpp"

namespace grassdisagg::cli {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumerical = 3;

/// Named sub-seeds derived from the single --seed value.
inline std::uint64_t generator_seed(std::uint64_t seed) { return derive_seed(seed, "generator"); }
inline std::uint64_t split_seed(std::uint64_t seed) { return derive_seed(seed, "split"); }

/// Runs one invocation. `args` excludes the program name.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace grassdisagg::cli
