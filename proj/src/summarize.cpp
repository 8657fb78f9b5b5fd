#include "vsum/summarize.hpp"

#include "vsum/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace vsum {

using nlohmann::json;

KnapsackValue parse_knapsack_value(const std::string& s) {
  if (s == "mean_score") return KnapsackValue::mean_score;
  if (s == "score_times_length") return KnapsackValue::score_times_length;
  throw ConfigError("knapsack_value: expected 'mean_score' or 'score_times_length', got '" + s + "'");
}

std::string to_string(KnapsackValue v) { return v == KnapsackValue::mean_score ? "mean_score" : "score_times_length"; }

namespace {

// Prefix sums for O(1) segment scatter under the linear kernel.
class ScatterTable {
 public:
  explicit ScatterTable(const FeatureMatrix& x) : n_(x.rows()) {
    const Eigen::MatrixXd k = x * x.transpose();
    block_ = Eigen::MatrixXd::Zero(n_ + 1, n_ + 1);
    diag_ = Eigen::VectorXd::Zero(n_ + 1);
    for (Eigen::Index i = 0; i < n_; ++i) {
      diag_(i + 1) = diag_(i) + k(i, i);
      for (Eigen::Index j = 0; j < n_; ++j) block_(i + 1, j + 1) = block_(i, j + 1) + block_(i + 1, j) - block_(i, j) + k(i, j);
    }
  }

  // Scatter of frames [i, j).
  double operator()(Eigen::Index i, Eigen::Index j) const {
    const double inner = block_(j, j) - block_(i, j) - block_(j, i) + block_(i, i);
    return diag_(j) - diag_(i) - inner / static_cast<double>(j - i);
  }

 private:
  Eigen::Index n_;
  Eigen::MatrixXd block_;
  Eigen::VectorXd diag_;
};

double penalty_term(double penalty, double scale, Eigen::Index n, Eigen::Index m) {
  const double md = static_cast<double>(m);
  return penalty * scale * md * (std::log(static_cast<double>(n) / md) + 1.0);
}

}  // namespace

double kts_scatter(const FeatureMatrix& x, const std::vector<Eigen::Index>& starts) {
  const ScatterTable table(x);
  double total = 0.0;
  Eigen::Index prev = 0;
  for (auto s : starts) {
    if (s <= prev || s >= x.rows()) throw std::invalid_argument("kts_scatter: change points must increase within (0, N)");
    total += table(prev, s);
    prev = s;
  }
  return total + table(prev, x.rows());
}

double kts_noise_scale(const FeatureMatrix& x) {
  const Eigen::Index n = x.rows();
  std::vector<double> diffs;
  for (Eigen::Index t = 1; t < n; ++t) diffs.push_back((x.row(t) - x.row(t - 1)).squaredNorm());
  double med = 0.0;
  if (!diffs.empty()) {
    const auto mid = diffs.begin() + static_cast<std::ptrdiff_t>(diffs.size() / 2);
    std::nth_element(diffs.begin(), mid, diffs.end());
    med = *mid;
    if (diffs.size() % 2 == 0) med = 0.5 * (med + *std::max_element(diffs.begin(), mid));
  }
  const double floor = n > 0 ? 1e-9 * x.rowwise().squaredNorm().mean() : 0.0;
  return std::max(med, floor);
}

double kts_objective(const FeatureMatrix& x, const std::vector<Eigen::Index>& starts, double penalty) {
  const auto m = static_cast<Eigen::Index>(starts.size()) + 1;
  return kts_scatter(x, starts) + penalty_term(penalty, kts_noise_scale(x), x.rows(), m);
}

std::vector<Eigen::Index> kts_segment(const FeatureMatrix& x, int max_segments, double penalty) {
  if (max_segments < 1) throw std::invalid_argument("kts_segment: max_segments must be at least 1");
  const Eigen::Index n = x.rows();
  if (n < 2) throw std::invalid_argument("kts_segment: need at least 2 frames");
  const Eigen::Index max_m = std::min<Eigen::Index>(max_segments, n);
  const ScatterTable table(x);
  const double scale = kts_noise_scale(x);
  constexpr double inf = std::numeric_limits<double>::infinity();

  // cost(m, j): best scatter of frames [0, j) in m segments.
  Eigen::MatrixXd cost = Eigen::MatrixXd::Constant(max_m + 1, n + 1, inf);
  Eigen::Matrix<Eigen::Index, Eigen::Dynamic, Eigen::Dynamic> from(max_m + 1, n + 1);
  from.setConstant(-1);
  for (Eigen::Index j = 1; j <= n; ++j) {
    cost(1, j) = table(0, j);
    from(1, j) = 0;
  }
  for (Eigen::Index m = 2; m <= max_m; ++m) {
    for (Eigen::Index j = m; j <= n; ++j) {
      double best = inf;
      Eigen::Index arg = -1;
      for (Eigen::Index i = m - 1; i < j; ++i) {
        const double c = cost(m - 1, i) + table(i, j);
        if (c < best) {
          best = c;
          arg = i;
        }
      }
      cost(m, j) = best;
      from(m, j) = arg;
    }
  }

  Eigen::Index best_m = 1;
  double best_g = inf;
  for (Eigen::Index m = 1; m <= max_m; ++m) {
    const double g = cost(m, n) + penalty_term(penalty, scale, n, m);
    if (g < best_g) {
      best_g = g;
      best_m = m;
    }
  }

  std::vector<Eigen::Index> starts;
  Eigen::Index j = n;
  for (Eigen::Index m = best_m; m > 1; --m) {
    j = from(m, j);
    starts.push_back(j);
  }
  std::reverse(starts.begin(), starts.end());
  return starts;
}

int default_max_segments(std::int64_t n_frames, Eigen::Index n, double fps) {
  const auto by_time = static_cast<std::int64_t>(std::ceil(static_cast<double>(n_frames) / (2.0 * fps)));
  const auto cap = std::min<std::int64_t>(by_time, n / 2);
  return static_cast<int>(std::max<std::int64_t>(cap, 1));
}

ShotSegmentation segments_to_shots(const std::vector<Eigen::Index>& starts, const std::vector<std::int64_t>& picks,
                                   std::int64_t n_frames) {
  ShotSegmentation seg;
  seg.source = SegmentSource::kts;
  std::int64_t begin = 0;
  for (auto s : starts) {
    if (s <= 0 || static_cast<std::size_t>(s) >= picks.size()) throw std::invalid_argument("segments_to_shots: change point out of range");
    const std::int64_t next = picks[static_cast<std::size_t>(s)];
    seg.boundaries.push_back({begin, next - 1});
    begin = next;
  }
  seg.boundaries.push_back({begin, n_frames - 1});
  return seg;
}

std::vector<double> upsample_scores(const Eigen::VectorXd& p, const std::vector<std::int64_t>& picks, std::int64_t n_frames) {
  if (static_cast<std::size_t>(p.size()) != picks.size() || picks.empty()) {
    throw std::invalid_argument("upsample_scores: scores and picks differ in length");
  }
  std::vector<double> out(static_cast<std::size_t>(n_frames));
  std::size_t k = 0;
  for (std::int64_t f = 0; f < n_frames; ++f) {
    while (k + 1 < picks.size() && picks[k + 1] <= f) ++k;
    out[static_cast<std::size_t>(f)] = p(static_cast<Eigen::Index>(k));
  }
  return out;
}

std::vector<double> shot_scores(const Eigen::VectorXd& p, const ShotSegmentation& seg, const std::vector<std::int64_t>& picks,
                                std::int64_t n_frames) {
  const auto frames = upsample_scores(p, picks, n_frames);
  std::vector<double> out;
  out.reserve(seg.boundaries.size());
  for (const auto& shot : seg.boundaries) {
    if (shot.length() <= 0 || shot.start < 0 || shot.end >= n_frames) throw std::invalid_argument("shot_scores: empty or out-of-range shot");
    double s = 0.0;
    for (auto f = shot.start; f <= shot.end; ++f) s += frames[static_cast<std::size_t>(f)];
    out.push_back(s / static_cast<double>(shot.length()));
  }
  return out;
}

std::vector<std::size_t> knapsack_select(const std::vector<double>& values, const std::vector<std::int64_t>& weights,
                                         std::int64_t capacity) {
  const std::size_t n = values.size();
  if (weights.size() != n) throw std::invalid_argument("knapsack_select: values and weights differ in length");
  for (std::size_t i = 0; i < n; ++i) {
    if (weights[i] <= 0) throw std::invalid_argument("knapsack_select: weights must be positive");
    if (!(values[i] >= 0.0)) throw std::invalid_argument("knapsack_select: values must be non-negative");
  }
  if (capacity <= 0 || n == 0) return {};
  const auto cap = static_cast<std::size_t>(capacity);

  // best[i][c]: optimum over items i..n-1 with capacity c.
  std::vector<std::vector<double>> best(n + 1, std::vector<double>(cap + 1, 0.0));
  for (std::size_t i = n; i-- > 0;) {
    const auto w = static_cast<std::size_t>(weights[i]);
    for (std::size_t c = 0; c <= cap; ++c) {
      double v = best[i + 1][c];
      if (w <= c) v = std::max(v, values[i] + best[i + 1][c - w]);
      best[i][c] = v;
    }
  }

  // Walking forward, taking an item whenever an optimum containing it exists
  // and stopping once nothing more can be gained yields the smallest set in
  // lexicographic order.
  std::vector<std::size_t> chosen;
  std::size_t c = cap;
  for (std::size_t i = 0; i < n; ++i) {
    if (best[i][c] == 0.0) break;
    const auto w = static_cast<std::size_t>(weights[i]);
    if (w <= c && values[i] + best[i + 1][c - w] == best[i][c]) {
      chosen.push_back(i);
      c -= w;
    }
  }
  return chosen;
}

std::int64_t summary_budget(std::int64_t n_frames, double ratio) {
  return static_cast<std::int64_t>(std::floor(ratio * static_cast<double>(n_frames) + 1e-9));
}

Summary build_summary(const Eigen::VectorXd& p, const FeatureSequence& seq, const VideoAnnotations& ann,
                      const SummaryConfig& cfg) {
  if (p.size() != seq.length()) throw std::invalid_argument("build_summary: score length does not match the sequence");
  Summary s;
  s.video_id = seq.video_id;
  if (ann.change_points) {
    s.segmentation.boundaries = *ann.change_points;
    s.segmentation.source = SegmentSource::precomputed;
  } else {
    const int max_seg = cfg.kts_max_segments > 0 ? cfg.kts_max_segments
                                                 : default_max_segments(seq.n_frames, seq.length(), cfg.fps);
    s.segmentation = segments_to_shots(kts_segment(seq.features, max_seg, cfg.kts_penalty), seq.picks, seq.n_frames);
  }
  s.shot_scores = shot_scores(p, s.segmentation, seq.picks, seq.n_frames);

  std::vector<std::int64_t> lengths;
  std::vector<double> values;
  for (std::size_t i = 0; i < s.segmentation.boundaries.size(); ++i) {
    const auto len = s.segmentation.boundaries[i].length();
    lengths.push_back(len);
    values.push_back(cfg.knapsack_value == KnapsackValue::mean_score ? s.shot_scores[i]
                                                                     : s.shot_scores[i] * static_cast<double>(len));
  }
  s.budget_frames = summary_budget(seq.n_frames, cfg.budget_ratio);
  s.selected_shots = knapsack_select(values, lengths, s.budget_frames);
  s.keyshot_vector.assign(static_cast<std::size_t>(seq.n_frames), 0);
  for (auto i : s.selected_shots) {
    const auto& shot = s.segmentation.boundaries[i];
    for (auto f = shot.start; f <= shot.end; ++f) s.keyshot_vector[static_cast<std::size_t>(f)] = 1;
    s.used_frames += shot.length();
  }
  return s;
}

json summary_to_json(const Summary& s) {
  json bounds = json::array();
  for (const auto& b : s.segmentation.boundaries) bounds.push_back({b.start, b.end});
  json rle = json::array();
  for (std::size_t i = 0; i < s.keyshot_vector.size();) {
    std::size_t j = i;
    while (j < s.keyshot_vector.size() && s.keyshot_vector[j] == s.keyshot_vector[i]) ++j;
    rle.push_back({static_cast<int>(s.keyshot_vector[i]), j - i});
    i = j;
  }
  return json{{"video_id", s.video_id},
              {"boundaries", bounds},
              {"segmentation_source", s.segmentation.source == SegmentSource::kts ? "kts" : "precomputed"},
              {"shot_scores", s.shot_scores},
              {"selected_shots", s.selected_shots},
              {"keyshot_vector", rle},
              {"budget", s.budget_frames},
              {"used_frames", s.used_frames}};
}

std::vector<std::uint8_t> decode_rle(const json& rle) {
  std::vector<std::uint8_t> out;
  for (const auto& run : rle) {
    const auto v = run.at(0).get<int>();
    const auto count = run.at(1).get<std::size_t>();
    out.insert(out.end(), count, static_cast<std::uint8_t>(v));
  }
  return out;
}

}  // namespace vsum
