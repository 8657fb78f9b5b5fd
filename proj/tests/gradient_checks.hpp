#pragma once

// Finite-difference checks shared by the unit tests and the acceptance runner.
// Each returns the worst relative error over `instances` random problems.

#include "oracles.hpp"

#include "vsum/losses.hpp"
#include "vsum/model.hpp"
#include "vsum/sinkhorn.hpp"

#include <algorithm>
#include <string>
#include <tuple>
#include <vector>

namespace vsum::oracle {

inline constexpr double kFdStep = 1e-6;
// Parameter gradients of the network are often tiny at initialization, so
// the network check starts from a much larger step.
inline constexpr double kNetworkStep = 1e-2;
inline constexpr double kNetworkLogitMove = 1e-5;
inline constexpr double kNetworkMinStep = 1e-4;

struct CheckResult {
  double worst = 0.0;
  int instances = 0;
  int skipped = 0;  // coordinates dropped next to a ReLU kink
};

inline int random_length(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

/// kind: "sd", "corr", "pre", "ptrim", "pctrim", "unsup".
inline CheckResult check_loss_gradients(const std::string& kind, int instances, std::uint64_t seed) {
  Rng rng(seed);
  CheckResult out;
  for (int k = 0; k < instances; ++k) {
    // Pearson correlation is constant at length 2, which leaves nothing to compare.
    const bool pair = kind == "corr" || kind == "pre";
    const int n = random_length(rng, pair ? 3 : 2, 12);
    const Eigen::VectorXd p = uniform_vector(rng, n, 0.05, 0.95);
    const Eigen::VectorXd q = uniform_vector(rng, n, 0.05, 0.95);
    const Eigen::VectorXd delta = uniform_vector(rng, n - 1, 0.01, 1.0);
    const Eigen::VectorXd gamma = uniform_vector(rng, n - 1, 0.01, 1.0);
    const double nu = uniform(rng, 0.0, 0.05);
    double err = 0.0;
    if (kind == "sd") {
      err = rel_error(loss_sd(p).grad, central_diff([](const Eigen::VectorXd& v) { return loss_sd(v).value; }, p, kFdStep));
    } else if (kind == "corr" || kind == "pre") {
      const double w = kind == "pre" ? nu : 0.0;
      auto eval = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        return kind == "pre" ? loss_pre(a, b, w) : loss_corr(a, b);
      };
      const auto r = eval(p, q);
      const auto ga = central_diff([&](const Eigen::VectorXd& v) { return eval(v, q).value; }, p, kFdStep);
      const auto gb = central_diff([&](const Eigen::VectorXd& v) { return eval(p, v).value; }, q, kFdStep);
      err = std::max(rel_error(r.grad_a, ga), rel_error(r.grad_b, gb));
    } else if (kind == "ptrim") {
      err = rel_error(loss_ptrim(p, delta).grad,
                      central_diff([&](const Eigen::VectorXd& v) { return loss_ptrim(v, delta).value; }, p, kFdStep));
    } else if (kind == "pctrim") {
      err = rel_error(loss_pctrim(p, gamma).grad,
                      central_diff([&](const Eigen::VectorXd& v) { return loss_pctrim(v, gamma).value; }, p, kFdStep));
    } else if (kind == "unsup") {
      const FeatureMatrix x = normal_matrix(rng, n, 4);
      const LossWeights w{uniform(rng, 0.1, 2.0), 0.0, uniform(rng, 0.0, 2.0), 0.0};
      const SinkhornConfig cfg;
      auto f = [&](const Eigen::VectorXd& v) { return loss_unsup(v, delta, gamma, x, w, cfg).value; };
      err = rel_error(loss_unsup(p, delta, gamma, x, w, cfg).grad, central_diff(f, p, kFdStep));
    } else {
      throw std::invalid_argument("unknown loss kind " + kind);
    }
    out.worst = std::max(out.worst, err);
    ++out.instances;
  }
  return out;
}

/// d value / d p of the (debiased) representativeness term against central
/// differences, with a tight solver tolerance and max_iters iterations.
inline CheckResult check_sinkhorn_gradient(int instances, std::uint64_t seed, int max_iters = 2000) {
  Rng rng(seed);
  CheckResult out;
  SinkhornConfig cfg;
  cfg.max_iters = max_iters;
  cfg.tolerance = 1e-14;
  cfg.epsilon = 0.5;
  for (int k = 0; k < instances; ++k) {
    const int n = random_length(rng, 2, 8);
    const FeatureMatrix x = normal_matrix(rng, n, random_length(rng, 2, 6));
    const Eigen::VectorXd p = uniform_vector(rng, n, 0.2, 0.95);
    cfg.debiased = k % 2 == 0;
    const auto r = sinkhorn_rep(x, p, cfg);
    const auto g = central_diff([&](const Eigen::VectorXd& v) { return sinkhorn_rep(x, v, cfg).value; }, p, kFdStep);
    out.worst = std::max(out.worst, rel_error(r.grad, g));
    ++out.instances;
  }
  return out;
}

namespace detail {

inline bool same_activation_pattern(const ForwardCache& a, const ForwardCache& b) {
  auto same = [](const Eigen::MatrixXd& u, const Eigen::MatrixXd& v) {
    return ((u.array() > 0.0) == (v.array() > 0.0)).all();
  };
  return same(a.conv_pre, b.conv_pre) && same(a.fc1_pre, b.fc1_pre) && same(a.fc2_pre, b.fc2_pre);
}

inline double min_abs_pre(const ForwardCache& c) {
  return std::min({c.conv_pre.cwiseAbs().minCoeff(), c.fc1_pre.cwiseAbs().minCoeff(), c.fc2_pre.cwiseAbs().minCoeff()});
}

}  // namespace detail

/// Parameter gradient of L = sum_t w_t p_t on random toy networks, checked on
/// about `coords_per_instance` sampled coordinates spread over every tensor;
/// the relative error is taken per tensor.
/// Coordinates where even a kNetworkMinStep step flips a ReLU, or instances with a
/// pre-activation within 1e-9 of zero, are skipped.
inline CheckResult check_network_gradient(int instances, std::uint64_t seed, int coords_per_instance = 24) {
  Rng rng(seed);
  CheckResult out;
  for (int k = 0; k < instances; ++k) {
    const int d = random_length(rng, 2, 16);
    const int n = random_length(rng, 1, 12);
    ScoringModel model = init_params(derive_seed(seed, "fd_model", static_cast<std::uint64_t>(k)), d);
    {
      const auto o = ScoringModel::offsets(d);
      auto& th = model.parameters();
      for (auto [lo, len] : {std::pair{o.conv_b, kConvChannels}, std::pair{o.fc1_b, kHidden1}, std::pair{o.fc2_b, kHidden2},
                             std::pair{o.fc3_b, Eigen::Index{1}}})
        for (Eigen::Index i = 0; i < len; ++i) th(lo + i) = uniform(rng, -0.05, 0.05);
    }
    const FeatureMatrix x = normal_matrix(rng, n, d);
    const Eigen::VectorXd w = uniform_vector(rng, n, -1.0, 1.0);
    const auto cache = forward(model, x);
    if (detail::min_abs_pre(cache) < 1e-9) {
      ++out.skipped;
      continue;
    }
    const ScoringModel grads = backward(model, cache, w);

    const auto o = ScoringModel::offsets(d);
    const std::vector<std::pair<Eigen::Index, Eigen::Index>> blocks = {
        {o.conv[0], o.conv[1]}, {o.conv[1], o.conv[2]}, {o.conv[2], o.conv_b}, {o.conv_b, o.fc1_w},
        {o.fc1_w, o.fc1_b},     {o.fc1_b, o.fc2_w},     {o.fc2_w, o.fc2_b},     {o.fc2_b, o.fc3_w},
        {o.fc3_w, o.fc3_b},     {o.fc3_b, o.total}};
    const int per_block = std::max(2, coords_per_instance / static_cast<int>(blocks.size()));
    for (const auto& [lo, hi] : blocks) {
      Eigen::VectorXd analytic(per_block), numeric(per_block);
      Eigen::Index used = 0;
      for (int c = 0; c < per_block; ++c) {
        const auto idx = lo + static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::uint64_t>(hi - lo)));
        ScoringModel probe = model;
        const double keep = probe.parameters()(idx);
        auto probe_at = [&](double h) {
          probe.parameters()(idx) = keep + h;
          auto up = forward(probe, x);
          probe.parameters()(idx) = keep - h;
          auto down = forward(probe, x);
          probe.parameters()(idx) = keep;
          return std::pair{std::move(up), std::move(down)};
        };
        // With the ReLU pattern fixed the logits are affine in one parameter.
        // The step is as large as possible, so rounding in the scores stays
        // small, while the logits move by at most kNetworkLogitMove (keeping
        // the sigmoid's curvature out) and no ReLU changes state.
        double h = kNetworkStep;
        auto [up, down] = probe_at(h);
        const double slope = (up.logits - down.logits).cwiseAbs().maxCoeff() / (2.0 * h);
        if (slope * h > kNetworkLogitMove) {
          h = kNetworkLogitMove / slope;
          std::tie(up, down) = probe_at(h);
        }
        while (h > kNetworkMinStep &&
               (!detail::same_activation_pattern(up, cache) || !detail::same_activation_pattern(down, cache))) {
          h *= 0.25;
          std::tie(up, down) = probe_at(h);
        }
        if (!detail::same_activation_pattern(up, cache) || !detail::same_activation_pattern(down, cache)) {
          ++out.skipped;
          continue;
        }
        analytic(used) = grads.parameters()(idx);
        numeric(used) = w.dot(up.scores - down.scores) / (2.0 * h);
        ++used;
      }
      if (used > 0) out.worst = std::max(out.worst, rel_error(analytic.head(used), numeric.head(used)));
    }
    ++out.instances;
  }
  return out;
}

}  // namespace vsum::oracle
