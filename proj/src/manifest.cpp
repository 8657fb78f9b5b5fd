#include "vsum/manifest.hpp"

#include "vsum/errors.hpp"

#include <sys/resource.h>

#include <fstream>
#include <sstream>

namespace vsum {

using nlohmann::json;

json RunManifest::to_json() const {
  return json{{"command", command},
              {"config", config},
              {"config_hash", config_hash},
              {"dataset", {{"path", dataset_path}, {"checksum", dataset_checksum}}},
              {"splits", splits_reference},
              {"seeds", seeds},
              {"artifacts", artifacts},
              {"resources", {{"wall_seconds", wall_seconds}, {"peak_rss_kb", peak_rss_kb}}}};
}

RunManifest RunManifest::from_json(const json& j) {
  RunManifest m;
  try {
    m.command = j.at("command").get<std::string>();
    m.config = j.at("config");
    m.config_hash = j.at("config_hash").get<std::string>();
    m.dataset_path = j.at("dataset").at("path").get<std::string>();
    m.dataset_checksum = j.at("dataset").at("checksum").get<std::string>();
    m.splits_reference = j.at("splits").get<std::string>();
    m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    m.artifacts = j.at("artifacts").get<std::map<std::string, std::string>>();
    m.wall_seconds = j.at("resources").at("wall_seconds").get<double>();
    m.peak_rss_kb = j.at("resources").at("peak_rss_kb").get<std::int64_t>();
  } catch (const json::exception& ex) {
    throw DataError(std::string("malformed run manifest: ") + ex.what());
  }
  return m;
}

void RunManifest::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write manifest " + path.string());
  out << to_json().dump(2) << '\n';
}

RunManifest RunManifest::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return from_json(json::parse(ss.str()));
  } catch (const json::parse_error& ex) {
    throw DataError("manifest " + path.string() + ": " + ex.what());
  }
}

std::int64_t peak_rss_kb() {
  rusage u{};
  if (getrusage(RUSAGE_SELF, &u) != 0) return 0;
  return static_cast<std::int64_t>(u.ru_maxrss);
}

}  // namespace vsum
