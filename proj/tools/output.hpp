#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace rnash::cli {

// %.17g: round-trips every double.
[[nodiscard]] std::string format_double(double v);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  struct Cell {
    std::string text;
    Cell(double v) : text(format_double(v)) {}                 // NOLINT(google-explicit-constructor)
    Cell(int v) : text(std::to_string(v)) {}                   // NOLINT(google-explicit-constructor)
    Cell(long v) : text(std::to_string(v)) {}                  // NOLINT(google-explicit-constructor)
    Cell(std::size_t v) : text(std::to_string(v)) {}           // NOLINT(google-explicit-constructor)
    Cell(std::string v) : text(std::move(v)) {}                // NOLINT(google-explicit-constructor)
    Cell(const char* v) : text(v) {}                           // NOLINT(google-explicit-constructor)
  };
  void add(std::vector<Cell> row);
  [[nodiscard]] std::string str() const;
  [[nodiscard]] std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Writes to a sibling temporary and renames over the target.
void write_atomic(const std::filesystem::path& path, const std::string& content);

[[nodiscard]] std::string sha256_hex(const std::string& data);

// JSON sidecar: {config_hash, seed, command, versions, certificates, wall_time_s}.
struct Sidecar {
  std::string config_hash;
  unsigned long long seed = 0;
  std::string command;
  nlohmann::json certificates = nlohmann::json::array();
  double wall_time_s = 0.0;
  [[nodiscard]] std::string str() const;
};

inline constexpr const char* kVersion = "0.1.0";

}  // namespace rnash::cli
