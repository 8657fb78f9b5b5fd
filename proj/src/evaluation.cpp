#include "vsum/evaluation.hpp"

#include "vsum/errors.hpp"

#include <algorithm>
#include <stdexcept>

namespace vsum {

CorrelationTarget parse_correlation_target(const std::string& s) {
  if (s == "annotators") return CorrelationTarget::annotators;
  if (s == "gt_score") return CorrelationTarget::gt_score;
  throw ConfigError("correlation_target: expected 'annotators' or 'gt_score', got '" + s + "'");
}

std::string to_string(CorrelationTarget t) { return t == CorrelationTarget::annotators ? "annotators" : "gt_score"; }

F1Mode parse_f1_mode(const std::string& s) {
  if (s == "mean") return F1Mode::mean;
  if (s == "max") return F1Mode::max;
  throw ConfigError("f1_mode: expected 'mean' or 'max', got '" + s + "'");
}

std::string to_string(F1Mode m) { return m == F1Mode::mean ? "mean" : "max"; }

ProtocolResult correlation_protocol(std::span<const double> p, const VideoAnnotations& ann, CorrelationTarget target) {
  ProtocolResult r;
  if (target == CorrelationTarget::annotators && ann.user_scores && ann.user_scores->rows() > 0) {
    const auto& us = *ann.user_scores;
    if (static_cast<std::size_t>(us.cols()) != p.size()) throw ValidationError("user_scores width does not match scores");
    std::vector<double> row(static_cast<std::size_t>(us.cols()));
    for (Eigen::Index u = 0; u < us.rows(); ++u) {
      for (Eigen::Index t = 0; t < us.cols(); ++t) row[static_cast<std::size_t>(t)] = us(u, t);
      r.tau += kendall_tau(p, row).value;
      r.rho += spearman_rho(p, row).value;
    }
    r.n_targets = static_cast<int>(us.rows());
    r.tau /= r.n_targets;
    r.rho /= r.n_targets;
    return r;
  }
  if (ann.gt_score.empty()) throw ValidationError("no ground truth available for correlation");
  if (ann.gt_score.size() != p.size()) throw ValidationError("gt_score length does not match scores");
  r.tau = kendall_tau(p, ann.gt_score).value;
  r.rho = spearman_rho(p, ann.gt_score).value;
  r.n_targets = 1;
  return r;
}

double f1_keyshot(std::span<const std::uint8_t> pred, const BinaryMatrix& users, F1Mode mode) {
  if (users.rows() == 0) throw std::invalid_argument("f1_keyshot: no user summaries");
  if (static_cast<std::size_t>(users.cols()) != pred.size()) {
    throw std::invalid_argument("f1_keyshot: prediction length does not match user summaries");
  }
  std::int64_t pred_len = 0;
  for (auto v : pred) pred_len += v != 0;
  double agg = 0.0;
  for (Eigen::Index u = 0; u < users.rows(); ++u) {
    std::int64_t overlap = 0, user_len = 0;
    for (Eigen::Index f = 0; f < users.cols(); ++f) {
      const bool on = users(u, f) != 0;
      user_len += on;
      overlap += on && pred[static_cast<std::size_t>(f)] != 0;
    }
    double f1 = 0.0;
    if (overlap > 0) {
      const double precision = static_cast<double>(overlap) / static_cast<double>(pred_len);
      const double recall = static_cast<double>(overlap) / static_cast<double>(user_len);
      f1 = 2.0 * precision * recall / (precision + recall);
    }
    agg = mode == F1Mode::mean ? agg + f1 : std::max(agg, f1);
  }
  if (mode == F1Mode::mean) agg /= static_cast<double>(users.rows());
  return 100.0 * agg;
}

}  // namespace vsum
