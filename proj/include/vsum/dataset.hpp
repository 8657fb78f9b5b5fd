#pragma once

#include "vsum/infometrics.hpp"
#include "vsum/types.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vsum {

/// One video's sampled-frame features and frame bookkeeping.
struct FeatureSequence {
  std::string video_id;
  FeatureMatrix features;            // N x d, promoted from f32 on disk
  std::vector<std::int64_t> picks;   // original-frame index of each row
  std::int64_t n_frames = 0;         // frames in the original video

  Eigen::Index length() const noexcept { return features.rows(); }
  Eigen::Index dim() const noexcept { return features.cols(); }
};

struct VideoAnnotations {
  std::vector<double> gt_score;                         // length N, in [0, 1]
  std::optional<Eigen::MatrixXd> user_scores;           // U x N
  std::optional<BinaryMatrix> user_summaries;           // U' x n_frames
  std::optional<std::vector<FrameRange>> change_points; // tiles [0, n_frames - 1]
};

struct VideoRecord {
  FeatureSequence sequence;
  VideoAnnotations annotations;
  InfoMetrics metrics;  // computed once at load
};

/// Orders "video_2" before "video_10" by comparing digit runs numerically.
struct VideoIdLess {
  bool operator()(const std::string& a, const std::string& b) const;
};

enum class DatasetFormat { hdf5, json_dir };

DatasetFormat parse_dataset_format(const std::string& s);
std::string to_string(DatasetFormat f);

/// Directories are JSON-dir datasets, anything else is an HDF5 container.
DatasetFormat detect_dataset_format(const std::filesystem::path& path);

/// Immutable after construction; safe to share across concurrent runs.
class Dataset {
 public:
  using Map = std::map<std::string, VideoRecord, VideoIdLess>;

  Dataset() = default;
  explicit Dataset(Map videos, std::string checksum = {});

  std::size_t size() const noexcept { return videos_.size(); }
  bool contains(const std::string& id) const { return videos_.count(id) != 0; }
  const VideoRecord& at(const std::string& id) const;
  std::vector<std::string> ids() const;
  const Map& videos() const noexcept { return videos_; }

  /// FNV-1a over the source bytes (empty for in-memory datasets).
  const std::string& checksum() const noexcept { return checksum_; }

 private:
  Map videos_;
  std::string checksum_;
};

/// Throws ValidationError naming the video and the broken invariant.
void validate_record(const FeatureSequence& seq, const VideoAnnotations& ann);

/// Validates, precomputes metrics, and wraps the record.
VideoRecord make_record(FeatureSequence seq, VideoAnnotations ann);

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format);
Dataset load_dataset(const std::filesystem::path& path);

/// One `<video_id>.json` per video. Features are written as f32 values.
void write_json_dir(const Dataset& dataset, const std::filesystem::path& dir);
void write_hdf5(const Dataset& dataset, const std::filesystem::path& file);
void write_dataset(const Dataset& dataset, const std::filesystem::path& path, DatasetFormat format);

bool hdf5_available() noexcept;

// Backends; `load_dataset` dispatches to these.
Dataset::Map read_json_dir(const std::filesystem::path& dir);
Dataset::Map read_hdf5(const std::filesystem::path& file);

std::string checksum_path(const std::filesystem::path& path);

}  // namespace vsum
