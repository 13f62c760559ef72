#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace fsfbm::cli {

struct RunOverrides {
  std::string command;  // positional subcommand; must match config["command"] if both given
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

struct RunResult {
  int exit_code = 0;
  std::string summary;                 // one line: outcome, artifact path, config hash
  std::vector<std::string> artifacts;  // files written
  nlohmann::json echo;                 // resolved config (seed included) + key outputs
};

// Validates strictly (unknown keys rejected, no silent physical defaults),
// dispatches to the owning module, writes artifacts atomically.
RunResult run(const nlohmann::json& config, const RunOverrides& overrides);

// Convenience wrapper: load the JSON config from a file path.
RunResult run_file(const std::string& config_path, const RunOverrides& overrides);

}  // namespace fsfbm::cli
