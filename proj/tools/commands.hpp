#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "config.hpp"
#include "output.hpp"

namespace rnash::cli {

inline const std::vector<std::string> kCommands{"solve",   "genfun",   "ergodic",    "sweep",
                                                "nash-mc", "meanfield", "certify-seq"};

struct RunRequest {
  std::string command;
  std::optional<ExperimentConfig> config;  // absent only for the built-in oracle
  std::optional<std::string> out_dir;      // overrides outputs.directory
  std::optional<std::uint64_t> seed;       // overrides numerics.seed
  int threads = 0;
  bool quiet = false;
  std::optional<std::string> oracle;       // ergodic --oracle directed-chain
  std::optional<int> oracle_H;
};

struct CommandResult {
  std::vector<std::pair<std::string, CsvTable>> tables;  // file stem -> table
  nlohmann::json certificates = nlohmann::json::array();
  std::vector<std::string> notes;                        // human-readable summary lines
};

// Pure dispatch: computes the tables without touching the filesystem.
[[nodiscard]] CommandResult execute(const RunRequest& request);

// Full run: dispatch, atomic writes, sidecar, diagnostics on stderr.
// Returns 0, 2 (certification), 3 (numerical) or 4 (config).
[[nodiscard]] int run(const RunRequest& request);

// RICCATI_NASH_THREADS wins over the flag; 0 means hardware concurrency.
[[nodiscard]] int resolve_threads(int flag);

}  // namespace rnash::cli
