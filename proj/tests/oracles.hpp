#pragma once

// Slow, independent reference implementations used by the unit tests and the
// acceptance runner. None of them share code with the library.

#include "vsum/model.hpp"
#include "vsum/random.hpp"
#include "vsum/types.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace vsum::oracle {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Nested-loop forward pass of the scoring network.
inline std::vector<double> direct_forward(const ScoringModel& m, const FeatureMatrix& x) {
  const auto n = x.rows();
  const auto d = x.cols();
  std::vector<double> out(static_cast<std::size_t>(n));
  std::vector<double> h0(kConvChannels), h1(kHidden1), h2(kHidden2);
  for (Eigen::Index t = 0; t < n; ++t) {
    for (Eigen::Index c = 0; c < kConvChannels; ++c) {
      double s = m.conv_bias()(c);
      for (int k = 0; k < 3; ++k) {
        const Eigen::Index src = t + k - 1;
        if (src < 0 || src >= n) continue;
        for (Eigen::Index i = 0; i < d; ++i) s += m.conv_weight(c, i, k) * x(src, i);
      }
      h0[static_cast<std::size_t>(c)] = std::max(s, 0.0);
    }
    for (Eigen::Index r = 0; r < kHidden1; ++r) {
      double s = m.fc1_bias()(r);
      for (Eigen::Index c = 0; c < kConvChannels; ++c) s += m.fc1_weight()(r, c) * h0[static_cast<std::size_t>(c)];
      h1[static_cast<std::size_t>(r)] = std::max(s, 0.0);
    }
    for (Eigen::Index r = 0; r < kHidden2; ++r) {
      double s = m.fc2_bias()(r);
      for (Eigen::Index c = 0; c < kHidden1; ++c) s += m.fc2_weight()(r, c) * h1[static_cast<std::size_t>(c)];
      h2[static_cast<std::size_t>(r)] = std::max(s, 0.0);
    }
    double z = m.fc3_bias()(0);
    for (Eigen::Index c = 0; c < kHidden2; ++c) z += m.fc3_weight()(0, c) * h2[static_cast<std::size_t>(c)];
    out[static_cast<std::size_t>(t)] = sigmoid(z);
  }
  return out;
}

/// Kendall tau-b by counting all pairs.
inline double pair_tau(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::int64_t conc = 0, disc = 0, tie_x = 0, tie_y = 0, total = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      ++total;
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0.0) ++tie_x;
      if (dy == 0.0) ++tie_y;
      if (dx == 0.0 || dy == 0.0) continue;
      if ((dx > 0) == (dy > 0)) ++conc; else ++disc;
    }
  if (tie_x == total || tie_y == total) return 0.0;
  return static_cast<double>(conc - disc) /
         std::sqrt(static_cast<double>(total - tie_x) * static_cast<double>(total - tie_y));
}

inline std::vector<double> naive_ranks(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double less = 0, equal = 0;
    for (double v : x) {
      if (v < x[i]) ++less;
      if (v == x[i]) ++equal;
    }
    r[i] = less + (equal + 1.0) / 2.0;
  }
  return r;
}

inline double textbook_pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double sa = 0, sb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa += a[i];
    sb += b[i];
  }
  const double ma = sa / n, mb = sb / n;
  double cov = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  if (va == 0.0 || vb == 0.0) return 0.0;
  return cov / std::sqrt(va * vb);
}

inline double rank_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  return textbook_pearson(naive_ranks(x), naive_ranks(y));
}

/// Contextual change recomputed from scratch for every t.
inline std::vector<double> quadratic_pctri(const std::vector<double>& h) {
  std::vector<double> out;
  for (std::size_t t = 1; t < h.size(); ++t) {
    double s = 0.0;
    for (std::size_t i = 0; i < t; ++i) s += h[i];
    const double mean = s / static_cast<double>(t);
    out.push_back(std::abs((h[t] - mean) / std::max(h[t], 1e-12)));
  }
  return out;
}

/// Exact discrete OT by enumerating basic feasible solutions: every vertex of
/// the transportation polytope is supported on n + m - 1 cells forming a
/// spanning tree of the bipartite graph, and its flows follow by leaf peeling.
inline double exact_ot(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::MatrixXd& c) {
  const int n = static_cast<int>(a.size());
  const int m = static_cast<int>(b.size());
  const int cells = n * m;
  const int basis = n + m - 1;
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> pick(static_cast<std::size_t>(basis));
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == basis) {
      std::vector<double> ra(a.data(), a.data() + n), rb(b.data(), b.data() + m);
      std::vector<bool> done(static_cast<std::size_t>(basis), false);
      Eigen::MatrixXd flow = Eigen::MatrixXd::Zero(n, m);
      for (int left = basis; left > 0;) {
        bool progressed = false;
        for (int k = 0; k < basis && !progressed; ++k) {
          if (done[static_cast<std::size_t>(k)]) continue;
          const int i = pick[static_cast<std::size_t>(k)] / m;
          const int j = pick[static_cast<std::size_t>(k)] % m;
          int row_open = 0, col_open = 0;
          for (int q = 0; q < basis; ++q) {
            if (done[static_cast<std::size_t>(q)]) continue;
            if (pick[static_cast<std::size_t>(q)] / m == i) ++row_open;
            if (pick[static_cast<std::size_t>(q)] % m == j) ++col_open;
          }
          if (row_open == 1 || col_open == 1) {
            const double v = row_open == 1 ? ra[static_cast<std::size_t>(i)] : rb[static_cast<std::size_t>(j)];
            flow(i, j) = v;
            ra[static_cast<std::size_t>(i)] -= v;
            rb[static_cast<std::size_t>(j)] -= v;
            done[static_cast<std::size_t>(k)] = true;
            --left;
            progressed = true;
          }
        }
        if (!progressed) return;  // contains a cycle
      }
      if (flow.minCoeff() < -1e-12) return;
      for (int i = 0; i < n; ++i)
        if (std::abs(flow.row(i).sum() - a(i)) > 1e-9) return;
      for (int j = 0; j < m; ++j)
        if (std::abs(flow.col(j).sum() - b(j)) > 1e-9) return;
      best = std::min(best, (flow.array() * c.array()).sum());
      return;
    }
    for (int k = start; k <= cells - (basis - depth); ++k) {
      pick[static_cast<std::size_t>(depth)] = k;
      rec(k + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

/// Best total value over all feasible subsets.
inline double brute_knapsack(const std::vector<double>& v, const std::vector<std::int64_t>& w, std::int64_t cap) {
  const std::size_t n = v.size();
  double best = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    std::int64_t weight = 0;
    double value = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1U) {
        weight += w[i];
        value += v[i];
      }
    if (weight <= cap) best = std::max(best, value);
  }
  return best;
}

/// Within-segment scatter summed directly from centered rows.
inline double direct_scatter(const FeatureMatrix& x, const std::vector<Eigen::Index>& starts) {
  std::vector<Eigen::Index> cuts{0};
  cuts.insert(cuts.end(), starts.begin(), starts.end());
  cuts.push_back(x.rows());
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const auto lo = cuts[s], hi = cuts[s + 1];
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(x.cols());
    for (auto t = lo; t < hi; ++t) mean += x.row(t);
    mean /= static_cast<double>(hi - lo);
    for (auto t = lo; t < hi; ++t) total += (x.row(t) - mean).squaredNorm();
  }
  return total;
}

/// Minimum of `objective` over every set of at most max_segments - 1 cuts.
inline double brute_segmentation(Eigen::Index n, int max_segments,
                                 const std::function<double(const std::vector<Eigen::Index>&)>& objective) {
  double best = std::numeric_limits<double>::infinity();
  const auto cuts = n - 1;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << cuts); ++mask) {
    std::vector<Eigen::Index> starts;
    for (Eigen::Index k = 0; k < cuts; ++k)
      if (mask >> k & 1U) starts.push_back(k + 1);
    if (static_cast<int>(starts.size()) + 1 > max_segments) continue;
    best = std::min(best, objective(starts));
  }
  return best;
}

/// Central differences of a scalar function of a vector.
inline Eigen::VectorXd central_diff(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x,
                                    double h) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double keep = x(i);
    x(i) = keep + h;
    const double up = f(x);
    x(i) = keep - h;
    const double down = f(x);
    x(i) = keep;
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

/// max |a - b| / max |b|; the norm-wise relative error of a gradient.
inline double rel_error(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric) {
  const double scale = std::max(numeric.cwiseAbs().maxCoeff(), analytic.cwiseAbs().maxCoeff());
  if (scale == 0.0) return 0.0;
  return (analytic - numeric).cwiseAbs().maxCoeff() / scale;
}

inline Eigen::VectorXd uniform_vector(Rng& rng, Eigen::Index n, double lo, double hi) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = uniform(rng, lo, hi);
  return v;
}

inline FeatureMatrix normal_matrix(Rng& rng, Eigen::Index n, Eigen::Index d, double sd = 1.0) {
  FeatureMatrix x(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = sd * standard_normal(rng);
  return x;
}

}  // namespace vsum::oracle
