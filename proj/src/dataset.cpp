#include "vsum/dataset.hpp"

#include "vsum/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace vsum {

namespace fs = std::filesystem;
using nlohmann::json;

bool VideoIdLess::operator()(const std::string& a, const std::string& b) const {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const bool da = std::isdigit(static_cast<unsigned char>(a[i])) != 0;
    const bool db = std::isdigit(static_cast<unsigned char>(b[j])) != 0;
    if (da && db) {
      std::size_t ie = i, je = j;
      while (ie < a.size() && std::isdigit(static_cast<unsigned char>(a[ie]))) ++ie;
      while (je < b.size() && std::isdigit(static_cast<unsigned char>(b[je]))) ++je;
      // Compare digit runs by value: strip leading zeros, then length, then text.
      std::size_t is = i, js = j;
      while (is + 1 < ie && a[is] == '0') ++is;
      while (js + 1 < je && b[js] == '0') ++js;
      if (ie - is != je - js) return ie - is < je - js;
      const int c = a.compare(is, ie - is, b, js, je - js);
      if (c != 0) return c < 0;
      if (ie - i != je - j) return ie - i < je - j;
      i = ie;
      j = je;
    } else {
      if (a[i] != b[j]) return a[i] < b[j];
      ++i;
      ++j;
    }
  }
  return (a.size() - i) < (b.size() - j);
}

DatasetFormat parse_dataset_format(const std::string& s) {
  if (s == "h5" || s == "hdf5") return DatasetFormat::hdf5;
  if (s == "json-dir" || s == "json") return DatasetFormat::json_dir;
  throw ConfigError("unknown dataset format '" + s + "' (expected h5 or json-dir)");
}

std::string to_string(DatasetFormat f) { return f == DatasetFormat::hdf5 ? "h5" : "json-dir"; }

DatasetFormat detect_dataset_format(const fs::path& path) {
  return fs::is_directory(path) ? DatasetFormat::json_dir : DatasetFormat::hdf5;
}

Dataset::Dataset(Map videos, std::string checksum) : videos_(std::move(videos)), checksum_(std::move(checksum)) {}

const VideoRecord& Dataset::at(const std::string& id) const {
  const auto it = videos_.find(id);
  if (it == videos_.end()) throw DataError("unknown video id '" + id + "'");
  return it->second;
}

std::vector<std::string> Dataset::ids() const {
  std::vector<std::string> out;
  out.reserve(videos_.size());
  for (const auto& [id, rec] : videos_) out.push_back(id);
  return out;
}

namespace {

[[noreturn]] void invalid(const std::string& video, const std::string& what) {
  throw ValidationError("video '" + video + "': " + what);
}

}  // namespace

void validate_record(const FeatureSequence& seq, const VideoAnnotations& ann) {
  const auto& id = seq.video_id;
  const auto n = seq.length();
  if (n < 2) invalid(id, "features must have at least 2 rows, got " + std::to_string(n));
  if (seq.dim() < 2) invalid(id, "features must have at least 2 columns, got " + std::to_string(seq.dim()));
  for (Eigen::Index t = 0; t < n; ++t) {
    if (!seq.features.row(t).allFinite()) invalid(id, "features row " + std::to_string(t) + " has non-finite values");
  }
  if (static_cast<Eigen::Index>(seq.picks.size()) != n) {
    invalid(id, "picks has length " + std::to_string(seq.picks.size()) + " but features has " + std::to_string(n) + " rows");
  }
  if (seq.picks.front() < 0) invalid(id, "picks must be non-negative");
  for (std::size_t i = 1; i < seq.picks.size(); ++i) {
    if (seq.picks[i] <= seq.picks[i - 1]) invalid(id, "picks must be strictly increasing (index " + std::to_string(i) + ")");
  }
  if (seq.n_frames < seq.picks.back() + 1 || seq.n_frames < n) {
    invalid(id, "n_frames " + std::to_string(seq.n_frames) + " is smaller than the picked frame range");
  }

  if (static_cast<Eigen::Index>(ann.gt_score.size()) != n) {
    invalid(id, "gtscore has length " + std::to_string(ann.gt_score.size()) + " but features has " + std::to_string(n) + " rows");
  }
  for (double v : ann.gt_score) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) invalid(id, "gtscore values must lie in [0, 1]");
  }
  if (ann.user_scores) {
    if (ann.user_scores->cols() != n) invalid(id, "user_scores must have N columns");
    if (!ann.user_scores->allFinite()) invalid(id, "user_scores has non-finite values");
  }
  if (ann.user_summaries) {
    if (ann.user_summaries->cols() != seq.n_frames) invalid(id, "user_summary must have n_frames columns");
    for (Eigen::Index i = 0; i < ann.user_summaries->size(); ++i) {
      const auto v = ann.user_summaries->data()[i];
      if (v != 0 && v != 1) invalid(id, "user_summary must be binary");
    }
  }
  if (ann.change_points) {
    const auto& cps = *ann.change_points;
    if (cps.empty()) invalid(id, "change_points is empty");
    std::int64_t expect = 0;
    for (std::size_t s = 0; s < cps.size(); ++s) {
      if (cps[s].start != expect || cps[s].end < cps[s].start) {
        invalid(id, "change_points must be contiguous and disjoint (segment " + std::to_string(s) + ")");
      }
      expect = cps[s].end + 1;
    }
    if (expect != seq.n_frames) invalid(id, "change_points must end at n_frames - 1");
  }
}

VideoRecord make_record(FeatureSequence seq, VideoAnnotations ann) {
  validate_record(seq, ann);
  VideoRecord rec;
  rec.metrics = compute_info_metrics(seq.features);
  rec.sequence = std::move(seq);
  rec.annotations = std::move(ann);
  return rec;
}

std::string checksum_path(const fs::path& path) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto hash_file = [&h](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw LoadError("cannot read " + p.string());
    std::vector<char> buf(1 << 16);
    while (in) {
      in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
      h = fnv1a64(buf.data(), static_cast<std::size_t>(in.gcount()), h);
    }
  };
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(path)) {
      if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      h = fnv1a64(f.filename().string(), h);
      hash_file(f);
    }
  } else {
    hash_file(path);
  }
  return to_hex(h);
}

namespace {

const json& require(const json& j, const char* key, const std::string& video) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) throw LoadError("video '" + video + "': missing field '" + key + "'");
  return *it;
}

// Parses a rectangular 2-D array; element conversion through T.
template <typename T, typename Matrix>
Matrix read_matrix(const json& j, const std::string& video, const char* key) {
  if (!j.is_array()) throw LoadError("video '" + video + "': field '" + key + "' must be a 2-D array");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ValidationError("video '" + video + "': field '" + key + "' is not rectangular (row " + std::to_string(r) + ")");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = static_cast<typename Matrix::Scalar>(row[static_cast<std::size_t>(c)].get<T>());
    }
  }
  return m;
}

VideoRecord parse_json_record(const json& j, const std::string& fallback_id) {
  FeatureSequence seq;
  VideoAnnotations ann;
  seq.video_id = j.contains("video_id") ? j.at("video_id").get<std::string>() : fallback_id;
  const auto& id = seq.video_id;
  try {
    // f32 on disk: narrow first so a write/read cycle is bit-exact.
    seq.features = read_matrix<float, FeatureMatrix>(require(j, "features", id), id, "features");
    seq.picks = require(j, "picks", id).get<std::vector<std::int64_t>>();
    seq.n_frames = require(j, "n_frames", id).get<std::int64_t>();
    for (float v : require(j, "gtscore", id).get<std::vector<float>>()) ann.gt_score.push_back(v);
    if (j.contains("user_scores") && !j["user_scores"].is_null()) {
      ann.user_scores = read_matrix<float, Eigen::MatrixXd>(j["user_scores"], id, "user_scores");
    }
    if (j.contains("user_summary") && !j["user_summary"].is_null()) {
      const auto m = read_matrix<double, Eigen::MatrixXd>(j["user_summary"], id, "user_summary");
      for (Eigen::Index i = 0; i < m.size(); ++i) {
        if (m.data()[i] != 0.0 && m.data()[i] != 1.0) throw ValidationError("video '" + id + "': user_summary must be binary");
      }
      ann.user_summaries = m.cast<std::uint8_t>();
    }
    if (j.contains("change_points") && !j["change_points"].is_null()) {
      std::vector<FrameRange> cps;
      for (const auto& seg : j["change_points"]) {
        if (!seg.is_array() || seg.size() != 2) throw ValidationError("video '" + id + "': change_points rows must be [start, end]");
        cps.push_back({seg[0].get<std::int64_t>(), seg[1].get<std::int64_t>()});
      }
      ann.change_points = std::move(cps);
    }
  } catch (const json::exception& ex) {
    throw LoadError("video '" + id + "': " + ex.what());
  }
  return make_record(std::move(seq), std::move(ann));
}

json matrix_to_json_f32(const FeatureMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(static_cast<float>(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

Dataset::Map read_json_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw LoadError("dataset directory " + dir.string() + " does not exist");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  Dataset::Map out;
  for (const auto& f : files) {
    std::ifstream in(f);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& ex) {
      throw LoadError(f.string() + ": " + ex.what());
    }
    auto rec = parse_json_record(j, f.stem().string());
    const auto id = rec.sequence.video_id;
    if (!out.emplace(id, std::move(rec)).second) throw ValidationError("duplicate video id '" + id + "'");
  }
  if (out.empty()) throw LoadError("no video records found in " + dir.string());
  return out;
}

void write_json_dir(const Dataset& dataset, const fs::path& dir) {
  fs::create_directories(dir);
  for (const auto& [id, rec] : dataset.videos()) {
    const auto& seq = rec.sequence;
    const auto& ann = rec.annotations;
    json j;
    j["video_id"] = id;
    j["features"] = matrix_to_json_f32(seq.features);
    j["picks"] = seq.picks;
    j["n_frames"] = seq.n_frames;
    std::vector<float> gt(ann.gt_score.begin(), ann.gt_score.end());
    j["gtscore"] = gt;
    if (ann.user_scores) {
      json rows = json::array();
      for (Eigen::Index r = 0; r < ann.user_scores->rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < ann.user_scores->cols(); ++c) row.push_back(static_cast<float>((*ann.user_scores)(r, c)));
        rows.push_back(std::move(row));
      }
      j["user_scores"] = std::move(rows);
    }
    if (ann.user_summaries) {
      json rows = json::array();
      for (Eigen::Index r = 0; r < ann.user_summaries->rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < ann.user_summaries->cols(); ++c) row.push_back(static_cast<int>((*ann.user_summaries)(r, c)));
        rows.push_back(std::move(row));
      }
      j["user_summary"] = std::move(rows);
    }
    if (ann.change_points) {
      json rows = json::array();
      for (const auto& cp : *ann.change_points) rows.push_back({cp.start, cp.end});
      j["change_points"] = std::move(rows);
    }
    std::ofstream out(dir / (id + ".json"));
    if (!out) throw DataError("cannot write " + (dir / (id + ".json")).string());
    out << j.dump() << '\n';
  }
}

void write_dataset(const Dataset& dataset, const fs::path& path, DatasetFormat format) {
  if (format == DatasetFormat::json_dir) {
    write_json_dir(dataset, path);
  } else {
    write_hdf5(dataset, path);
  }
}

Dataset load_dataset(const fs::path& path, DatasetFormat format) {
  if (!fs::exists(path)) throw LoadError("dataset path " + path.string() + " does not exist");
  auto videos = format == DatasetFormat::json_dir ? read_json_dir(path) : read_hdf5(path);
  return Dataset(std::move(videos), checksum_path(path));
}

Dataset load_dataset(const fs::path& path) { return load_dataset(path, detect_dataset_format(path)); }

}  // namespace vsum
