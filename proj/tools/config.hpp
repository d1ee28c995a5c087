#pragma once

#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rnash/core.hpp"

namespace rnash::cli {

// Shared numeric knobs; command-specific tables stay in `section`.
struct Numerics {
  int steps = 512;
  bool refine = false;          // double steps until successive runs agree to tol
  double tol = 1e-8;
  int H = 32;
  std::optional<double> r;      // extraction radius / decay rate
  std::optional<double> rho;    // gathering radius candidate
  int n_nodes = 0;              // 0: default plan
  double dt = 1e-3;
  int paths = 10000;
  std::uint64_t seed = 1;
  std::vector<double> horizons;
  std::vector<double> t_samples;
  int output_every = 1;         // flow samples written every k grid points
};

struct ExperimentConfig {
  std::string command;                // may be empty; the CLI subcommand decides
  std::optional<GameDescription> game;
  Numerics numerics;
  YAML::Node root;
  std::string out_dir = "out";
  std::vector<std::string> formats{"csv", "json"};
  std::string raw_text;               // hashed into the provenance sidecar
  std::filesystem::path base_dir;     // matrix files are resolved against it
};

// Throws Error(ConfigError) on any schema or range violation.
[[nodiscard]] ExperimentConfig parse_config(const std::string& text,
                                            const std::filesystem::path& base_dir = {});
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);

[[nodiscard]] GameDescription parse_game(const YAML::Node& node, const std::filesystem::path& base_dir = {});
[[nodiscard]] YAML::Node emit_game(const GameDescription& game);
[[nodiscard]] std::string game_to_text(const GameDescription& game);
[[nodiscard]] GameDescription game_from_text(const std::string& text);
[[nodiscard]] bool same_game(const GameDescription& a, const GameDescription& b);

// Dense family file: first line N, then for every player N^2 rows `i h k value`.
[[nodiscard]] std::vector<Matrix> read_matrix_file(const std::filesystem::path& path);
void write_matrix_file(const std::filesystem::path& path, const std::vector<Matrix>& family);

// Command table, e.g. `nash_mc:` for nash-mc; undefined when absent.
[[nodiscard]] YAML::Node command_section(const ExperimentConfig& cfg, const std::string& command);

[[nodiscard]] Matrix parse_matrix(const YAML::Node& node, const std::string& what);

// Typed reads with a default; type errors become ConfigError.
template <class T>
[[nodiscard]] T get_or(const YAML::Node& node, const std::string& key, T fallback);
[[nodiscard]] std::vector<double> get_list(const YAML::Node& node, const std::string& key,
                                           std::vector<double> fallback = {});
[[nodiscard]] std::vector<int> get_int_list(const YAML::Node& node, const std::string& key,
                                            std::vector<int> fallback = {});

}  // namespace rnash::cli
