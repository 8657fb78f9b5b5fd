#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace vsum {

struct Fold {
  std::vector<std::string> train;
  std::vector<std::string> test;

  bool operator==(const Fold&) const = default;
};

/// Cross-validation folds. Per fold, train and test are disjoint and cover
/// every video; across folds the test sets partition the videos.
struct SplitSpec {
  std::uint64_t seed = 0;
  int n_folds = 0;
  std::vector<Fold> folds;

  std::vector<std::string> all_ids() const;
  bool operator==(const SplitSpec&) const = default;
};

/// Seeded shuffle, then round-robin assignment: test sizes differ by at most 1.
/// Throws ConfigError when n_folds < 2 or n_folds > number of videos.
SplitSpec generate_cv_splits(const std::vector<std::string>& video_ids, int n_folds, std::uint64_t seed);

/// Throws ValidationError describing the first broken partition invariant.
void validate_splits(const SplitSpec& spec);

/// JSON `{seed, n_folds, folds: [{train: [...], test: [...]}]}`, one fold per line.
std::string serialize_splits(const SplitSpec& spec);

/// Throws ParseError carrying the offending line number.
SplitSpec parse_splits(const std::string& text);

SplitSpec read_splits(const std::filesystem::path& path);
void write_splits(const std::filesystem::path& path, const SplitSpec& spec);

/// Video filename for the 1-based TVSum container index (video_1 .. video_50).
const std::vector<std::string>& tvsum_video_filenames();

}  // namespace vsum
