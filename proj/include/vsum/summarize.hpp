#pragma once

#include "vsum/dataset.hpp"
#include "vsum/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace vsum {

enum class SegmentSource { precomputed, kts };

/// Inclusive original-frame shots that exactly tile [0, n_frames - 1].
struct ShotSegmentation {
  std::vector<FrameRange> boundaries;
  SegmentSource source = SegmentSource::kts;
};

enum class KnapsackValue { mean_score, score_times_length };

KnapsackValue parse_knapsack_value(const std::string& s);
std::string to_string(KnapsackValue v);

struct SummaryConfig {
  double budget_ratio = 0.15;
  double kts_penalty = 1.0;
  int kts_max_segments = 0;  // 0: min(ceil(n_frames / (2 fps)), N / 2)
  double fps = 30.0;
  KnapsackValue knapsack_value = KnapsackValue::mean_score;
};

/// Sum of within-segment scatter for the linear kernel; `starts` lists the
/// first index of every segment after the first.
double kts_scatter(const FeatureMatrix& x, const std::vector<Eigen::Index>& starts);

/// Noise scale that multiplies the penalty: the median squared distance
/// between consecutive frames (about 2 d sigma^2 under i.i.d. noise), floored
/// at 1e-9 times the mean squared norm.
double kts_noise_scale(const FeatureMatrix& x);

/// scatter + penalty * scale * m * (ln(N / m) + 1), m = starts.size() + 1.
double kts_objective(const FeatureMatrix& x, const std::vector<Eigen::Index>& starts, double penalty);

/// Optimal change points (sorted segment starts in 1..N-1) minimizing
/// kts_objective over at most `max_segments` segments. Ties favor fewer
/// segments. Throws std::invalid_argument when max_segments < 1.
std::vector<Eigen::Index> kts_segment(const FeatureMatrix& x, int max_segments, double penalty);

/// Default segment cap: min(ceil(n_frames / (2 fps)), N / 2), at least 1.
int default_max_segments(std::int64_t n_frames, Eigen::Index n, double fps);

/// Maps sampled-index change points to original-frame shots.
ShotSegmentation segments_to_shots(const std::vector<Eigen::Index>& starts, const std::vector<std::int64_t>& picks,
                                   std::int64_t n_frames);

/// Frame-level scores: frame f takes the score of the last pick <= f
/// (frames before the first pick take the first score).
std::vector<double> upsample_scores(const Eigen::VectorXd& p, const std::vector<std::int64_t>& picks, std::int64_t n_frames);

/// Mean upsampled score over each shot's frames.
std::vector<double> shot_scores(const Eigen::VectorXd& p, const ShotSegmentation& seg, const std::vector<std::int64_t>& picks,
                                std::int64_t n_frames);

/// Exact 0/1 knapsack. Among optimal sets, returns the lexicographically
/// smallest ascending index list. Values must be >= 0, weights > 0.
std::vector<std::size_t> knapsack_select(const std::vector<double>& values, const std::vector<std::int64_t>& weights,
                                         std::int64_t capacity);

std::int64_t summary_budget(std::int64_t n_frames, double ratio);

struct Summary {
  std::string video_id;
  ShotSegmentation segmentation;
  std::vector<double> shot_scores;
  std::vector<std::size_t> selected_shots;
  std::vector<std::uint8_t> keyshot_vector;  // length n_frames
  std::int64_t budget_frames = 0;            // capacity
  std::int64_t used_frames = 0;
};

/// Precomputed change points when present, KTS otherwise; then shot scoring
/// and knapsack selection under the budget.
Summary build_summary(const Eigen::VectorXd& p, const FeatureSequence& seq, const VideoAnnotations& ann,
                      const SummaryConfig& cfg = {});

/// {video_id, boundaries, shot_scores, selected_shots, keyshot_vector, budget};
/// keyshot_vector is run-length encoded as [[value, count], ...].
nlohmann::json summary_to_json(const Summary& s);
std::vector<std::uint8_t> decode_rle(const nlohmann::json& rle);

}  // namespace vsum
