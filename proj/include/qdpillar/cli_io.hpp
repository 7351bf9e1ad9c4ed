#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qdpillar/config.hpp"

namespace qdpillar {

inline const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names{"lifetime", "rabi", "hbt",    "hom",
                                              "spectrum", "fit",  "budget", "all"};
  return names;
}

/// Command-line overrides applied on top of a loaded config.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::int64_t> trials;  // Monte Carlo size of every stochastic run
  std::optional<std::int64_t> bins;    // histogram bins / spectrum samples
};

void apply_overrides(ExperimentConfig& config, const Overrides& overrides);

/// Runs one subcommand and writes its CSV and JSON files into
/// config.output_dir. Thread count never changes the files.
void run_subcommand(const std::string& name, const ExperimentConfig& config, unsigned threads,
                    std::ostream& log);

/// Exit status for a failure: 2 for configuration or parse problems,
/// 3 for numerical failures.
int exit_code_for(const std::exception& e);

/// Rows of doubles under a header line, 17 significant digits.
void write_csv(std::ostream& out, std::span<const std::string> header,
               std::span<const std::vector<double>> columns);

}  // namespace qdpillar
