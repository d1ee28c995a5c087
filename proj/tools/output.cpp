#include "output.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "rnash/error.hpp"

namespace rnash::cli {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void CsvTable::add(std::vector<Cell> row) {
  if (row.size() != header_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "CSV row width differs from the header");
  }
  std::vector<std::string> out;
  out.reserve(row.size());
  for (Cell& c : row) out.push_back(std::move(c.text));
  rows_.push_back(std::move(out));
}

std::string CsvTable::str() const {
  std::ostringstream os;
  for (std::size_t j = 0; j < header_.size(); ++j) os << (j ? "," : "") << header_[j];
  os << "\n";
  for (const auto& row : rows_) {
    for (std::size_t j = 0; j < row.size(); ++j) os << (j ? "," : "") << row[j];
    os << "\n";
  }
  return os.str();
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::ConfigError, "cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::ConfigError, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::ConfigError, "cannot rename onto " + path.string() + ": " + ec.message());
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 15]);
  }
  return out;
}

std::string Sidecar::str() const {
  nlohmann::ordered_json j;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["command"] = command;
  j["versions"] = {{"riccati_nash", kVersion}};
  j["certificates"] = certificates;
  j["wall_time_s"] = wall_time_s;
  return j.dump(2) + "\n";
}

}  // namespace rnash::cli
