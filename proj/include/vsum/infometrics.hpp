#pragma once

#include "vsum/types.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace vsum {

/// Floor applied to H_t when it is used as a denominator.
inline constexpr double kEntropyFloor = 1e-12;

/// Model-independent per-video series derived from the frame features.
///
/// `entropy[t]` is the entropy (nats) of the softmax distribution of frame t.
/// `ptri[k]` and `pctri[k]` belong to frame k + 1 (0-based): the first frame
/// has no predecessor, so both series have length N - 1.
struct InfoMetrics {
  std::vector<double> entropy;
  std::vector<double> ptri;
  std::vector<double> pctri;

  bool operator==(const InfoMetrics&) const = default;
};

/// Softmax over feature dimensions, computed with max-subtraction.
/// Throws std::invalid_argument for d < 2 or non-finite entries.
std::vector<double> feature_softmax(std::span<const double> x);

/// Shannon entropy in nats; 0 log 0 = 0. Throws on negative entries.
double entropy(std::span<const double> dist);

/// H_t for every frame.
std::vector<double> entropy_series(const FeatureMatrix& features);

/// |(H_t - H_{t-1}) / H_t| for t = 2..N.
std::vector<double> ptri_from_entropy(std::span<const double> h);

/// |(H_t - mean(H_1..H_{t-1})) / H_t| for t = 2..N, via a running prefix sum.
std::vector<double> pctri_from_entropy(std::span<const double> h);

std::vector<double> ptri_series(const FeatureMatrix& features);
std::vector<double> pctri_series(const FeatureMatrix& features);

/// Requires N >= 2.
InfoMetrics compute_info_metrics(const FeatureMatrix& features);

struct MetricsCacheEntry {
  std::string video_id;
  InfoMetrics metrics;
};

void write_metrics_cache(const std::filesystem::path& path, const std::vector<MetricsCacheEntry>& entries);
std::vector<MetricsCacheEntry> read_metrics_cache(const std::filesystem::path& path);

}  // namespace vsum
