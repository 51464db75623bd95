#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "config.hpp"

namespace symvar::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitFailed = 2;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;
  std::optional<std::filesystem::path> out;
};

// --out, then output.dir of the config, then $SYMVAR_OUT, then ./symvar_out
std::filesystem::path output_directory(const ExperimentConfig& c, const Overrides& o);

// Runs the experiment and writes its files into the output directory.
// Returns kExitPass or kExitFailed; library and config errors propagate.
int run(ExperimentConfig c, const Overrides& o, std::ostream& console);

}  // namespace symvar::cli
