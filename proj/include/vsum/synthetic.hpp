#pragma once

#include "vsum/dataset.hpp"
#include "vsum/random.hpp"

#include <cstdint>
#include <vector>

namespace vsum {

enum class SyntheticTruth {
  random,  // gt_score drawn independently of the features
  ptri,    // gt_score = delta_t / max delta (first frame 0)
};

/// Videos made of segments of identical frames X = s a u + c 1 (+ noise),
/// with u = (v, -v) fixed per dataset and, per segment, a random sign s,
/// amplitude a uniform in [amp_lo, amp_hi] and offset c normal with sd
/// `offset_scale`. The softmax entropy ignores s and c, so without noise
/// delta_t is exactly 0 inside a segment and positive where a new one starts.
struct SyntheticSpec {
  int videos = 20;
  int min_frames = 24;
  int max_frames = 32;
  int dim = 16;
  double amp_lo = 0.5;
  double amp_hi = 3.0;
  double offset_scale = 1.0;
  int min_run = 2;  // segment length range, in sampled frames
  int max_run = 6;
  double noise = 0.0;
  int stride = 15;  // original frames per sampled frame
  SyntheticTruth truth = SyntheticTruth::ptri;
  int users = 0;                // per-annotator score rows (noisy copies of gt)
  bool user_summaries = false;  // random 15% keyshot selections per user
  std::uint64_t seed = 0;
};

/// Features are rounded to f32 so an in-memory dataset equals its file copy.
Dataset make_synthetic_dataset(const SyntheticSpec& spec);

struct PlantedSequence {
  FeatureMatrix features;
  std::vector<Eigen::Index> starts;  // first index of every block after the first
};

/// Piecewise-constant means plus N(0, sigma^2) noise per coordinate.
/// Consecutive block means are `gap` noise magnitudes apart, i.e.
/// gap * sigma * sqrt(dim) in Euclidean distance.
PlantedSequence planted_blocks(Rng& rng, const std::vector<int>& lengths, int dim, double gap, double sigma);

}  // namespace vsum
