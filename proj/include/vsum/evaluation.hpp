#pragma once

#include "vsum/dataset.hpp"
#include "vsum/types.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace vsum {

struct Correlation {
  double value = 0.0;
  bool degenerate = false;  // one side constant; value is 0
};

/// Kendall tau-b in O(N log N) (sort, then merge-sort discordance count).
Correlation kendall_tau(std::span<const double> x, std::span<const double> y);

/// Pearson correlation of mid-ranks.
Correlation spearman_rho(std::span<const double> x, std::span<const double> y);

/// 1-based ranks; tied values share the average of their positions.
std::vector<double> mid_ranks(std::span<const double> x);

/// Plain Pearson correlation; degenerate when either side has zero variance.
Correlation pearson(std::span<const double> x, std::span<const double> y);

enum class CorrelationTarget {
  annotators,  // average over per-annotator scores when present, else gt_score
  gt_score,
};

CorrelationTarget parse_correlation_target(const std::string& s);
std::string to_string(CorrelationTarget t);

struct ProtocolResult {
  double tau = 0.0;
  double rho = 0.0;
  int n_targets = 0;
};

/// Throws ValidationError when no usable ground truth exists.
ProtocolResult correlation_protocol(std::span<const double> p, const VideoAnnotations& ann, CorrelationTarget target);

enum class F1Mode { mean, max };

F1Mode parse_f1_mode(const std::string& s);
std::string to_string(F1Mode m);

/// Keyshot F1 in percent against each user summary, reduced by mean or max.
/// An empty prediction scores 0.
double f1_keyshot(std::span<const std::uint8_t> predicted, const BinaryMatrix& user_summaries, F1Mode mode);

}  // namespace vsum
