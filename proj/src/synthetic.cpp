#include "vsum/synthetic.hpp"

#include "vsum/infometrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vsum {

namespace {

Eigen::VectorXd random_unit(Rng& rng, int dim) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = standard_normal(rng);
  return v / v.norm();
}

}  // namespace

Dataset make_synthetic_dataset(const SyntheticSpec& spec) {
  if (spec.videos < 1 || spec.min_frames < 2 || spec.max_frames < spec.min_frames || spec.dim < 2 || spec.dim % 2 != 0 ||
      spec.stride < 1 || spec.min_run < 1 || spec.max_run < spec.min_run) {
    throw std::invalid_argument("make_synthetic_dataset: invalid spec");
  }
  Rng base(derive_seed(spec.seed, "synthetic"));
  const Eigen::VectorXd half = random_unit(base, spec.dim / 2);
  Eigen::VectorXd u(spec.dim);
  u << half, -half;

  Dataset::Map videos;
  for (int k = 0; k < spec.videos; ++k) {
    Rng rng(derive_seed(spec.seed, "synthetic_video", static_cast<std::uint64_t>(k)));
    const auto span = static_cast<std::uint64_t>(spec.max_frames - spec.min_frames + 1);
    const auto n = static_cast<Eigen::Index>(spec.min_frames + static_cast<int>(uniform_index(rng, span)));

    FeatureSequence seq;
    seq.video_id = "video_" + std::to_string(k + 1);
    seq.features.resize(n, spec.dim);
    Eigen::VectorXd frame(spec.dim);
    Eigen::Index left = 0;
    for (Eigen::Index t = 0; t < n; ++t, --left) {
      if (left == 0) {
        const auto runs = static_cast<std::uint64_t>(spec.max_run - spec.min_run + 1);
        left = spec.min_run + static_cast<Eigen::Index>(uniform_index(rng, runs));
        const double sign = uniform01(rng) < 0.5 ? -1.0 : 1.0;
        const double amp = uniform(rng, spec.amp_lo, spec.amp_hi);
        const double offset = spec.offset_scale * standard_normal(rng);
        frame = (sign * amp) * u;
        frame.array() += offset;
      }
      for (int j = 0; j < spec.dim; ++j) {
        const double x = frame(j) + (spec.noise > 0.0 ? spec.noise * standard_normal(rng) : 0.0);
        seq.features(t, j) = static_cast<double>(static_cast<float>(x));
      }
    }
    for (Eigen::Index t = 0; t < n; ++t) seq.picks.push_back(t * spec.stride);
    seq.n_frames = n * spec.stride;

    const auto metrics = compute_info_metrics(seq.features);
    VideoAnnotations ann;
    ann.gt_score.assign(static_cast<std::size_t>(n), 0.0);
    if (spec.truth == SyntheticTruth::ptri) {
      const double hi = *std::max_element(metrics.ptri.begin(), metrics.ptri.end());
      for (Eigen::Index t = 1; t < n; ++t) {
        ann.gt_score[static_cast<std::size_t>(t)] = hi > 0.0 ? metrics.ptri[static_cast<std::size_t>(t - 1)] / hi : 0.0;
      }
    } else {
      for (auto& g : ann.gt_score) g = uniform01(rng);
    }
    for (auto& g : ann.gt_score) g = static_cast<double>(static_cast<float>(g));

    if (spec.users > 0) {
      Eigen::MatrixXd us(spec.users, n);
      for (int i = 0; i < spec.users; ++i)
        for (Eigen::Index t = 0; t < n; ++t) {
          const double v = ann.gt_score[static_cast<std::size_t>(t)] + 0.1 * standard_normal(rng);
          us(i, t) = static_cast<double>(static_cast<float>(std::clamp(v, 0.0, 1.0)));
        }
      ann.user_scores = us;
    }
    if (spec.user_summaries) {
      const int users = std::max(spec.users, 1);
      BinaryMatrix sel = BinaryMatrix::Zero(users, seq.n_frames);
      const auto len = std::max<std::int64_t>(1, seq.n_frames * 15 / 100);
      for (int i = 0; i < users; ++i) {
        const auto start = static_cast<std::int64_t>(uniform_index(rng, static_cast<std::uint64_t>(seq.n_frames - len + 1)));
        sel.row(i).segment(start, len).setOnes();
      }
      ann.user_summaries = sel;
    }
    auto id = seq.video_id;
    videos.emplace(std::move(id), make_record(std::move(seq), std::move(ann)));
  }
  return Dataset(std::move(videos));
}

PlantedSequence planted_blocks(Rng& rng, const std::vector<int>& lengths, int dim, double gap, double sigma) {
  if (lengths.empty() || dim < 1) throw std::invalid_argument("planted_blocks: need at least one block");
  Eigen::Index n = 0;
  for (int l : lengths) {
    if (l < 1) throw std::invalid_argument("planted_blocks: block lengths must be positive");
    n += l;
  }
  PlantedSequence out;
  out.features.resize(n, dim);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  Eigen::Index t = 0;
  for (std::size_t b = 0; b < lengths.size(); ++b) {
    if (b > 0) {
      mean += gap * sigma * std::sqrt(static_cast<double>(dim)) * random_unit(rng, dim);
      out.starts.push_back(t);
    }
    for (int i = 0; i < lengths[b]; ++i, ++t)
      for (int j = 0; j < dim; ++j) out.features(t, j) = mean(j) + sigma * standard_normal(rng);
  }
  return out;
}

}  // namespace vsum
