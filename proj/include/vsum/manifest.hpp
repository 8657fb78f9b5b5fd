#pragma once

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace vsum {

/// Everything needed to repeat a command, plus its resource usage.
struct RunManifest {
  std::string command;
  nlohmann::json config;  // canonical config snapshot
  std::string config_hash;
  std::string dataset_path;
  std::string dataset_checksum;
  std::string splits_reference;
  std::vector<std::uint64_t> seeds;
  std::map<std::string, std::string> artifacts;  // name -> path
  double wall_seconds = 0.0;
  std::int64_t peak_rss_kb = 0;

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
  void write(const std::filesystem::path& path) const;
  static RunManifest read(const std::filesystem::path& path);
};

/// Peak resident set size of this process in KiB (getrusage).
std::int64_t peak_rss_kb();

class WallTimer {
 public:
  WallTimer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace vsum
