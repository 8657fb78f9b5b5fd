#include "vsum/training.hpp"

#include "vsum/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>

namespace vsum {

PretrainScope parse_pretrain_scope(const std::string& s) {
  if (s == "train_fold") return PretrainScope::train_fold;
  if (s == "all_videos") return PretrainScope::all_videos;
  throw ConfigError("pretrain_scope: expected 'train_fold' or 'all_videos', got '" + s + "'");
}

std::string to_string(PretrainScope s) { return s == PretrainScope::train_fold ? "train_fold" : "all_videos"; }

void validate(const TrainConfig& c) {
  if (c.stage1_epochs < 0) throw ConfigError("stage1_epochs: must be >= 0");
  if (c.stage2_epochs < 0) throw ConfigError("stage2_epochs: must be >= 0");
  if (!(c.lr > 0.0)) throw ConfigError("lr: must be positive");
  if (!(c.weight_decay >= 0.0)) throw ConfigError("weight_decay: must be >= 0");
  if (!(c.mask_lo >= 0.0 && c.mask_lo <= c.mask_hi && c.mask_hi <= 1.0)) {
    throw ConfigError("mask_range: need 0 <= lo <= hi <= 1");
  }
  if (!(c.weights.w_ptrim >= 0.0)) throw ConfigError("w_ptrim: must be >= 0");
  if (!(c.weights.w_rep >= 0.0)) throw ConfigError("w_rep: must be >= 0");
  if (!(c.weights.w_pctrim >= 0.0)) throw ConfigError("w_pctrim: must be >= 0");
  if (!(c.weights.nu >= 0.0)) throw ConfigError("nu: must be >= 0");
  if (!(c.sinkhorn.epsilon > 0.0)) throw ConfigError("sinkhorn_epsilon: must be positive");
  if (c.sinkhorn.max_iters < 1) throw ConfigError("sinkhorn_max_iters: must be >= 1");
  if (!(c.sinkhorn.tolerance > 0.0)) throw ConfigError("sinkhorn_tolerance: must be positive");
}

MaskedViews mask_views(const FeatureMatrix& x, Rng& rng, double lo, double hi) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (n < 2) throw std::invalid_argument("mask_views: need at least 2 frames");
  MaskedViews v;
  v.ratio = lo == hi ? lo : uniform(rng, lo, hi);
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(std::llround(v.ratio * static_cast<double>(n))), n - 1);
  v.first = x;
  v.second = x;
  v.masked_first = sample_without_replacement(rng, n, k);
  v.masked_second = sample_without_replacement(rng, n, k);
  std::sort(v.masked_first.begin(), v.masked_first.end());
  std::sort(v.masked_second.begin(), v.masked_second.end());
  for (auto r : v.masked_first) v.first.row(static_cast<Eigen::Index>(r)).setZero();
  for (auto r : v.masked_second) v.second.row(static_cast<Eigen::Index>(r)).setZero();
  return v;
}

std::vector<double> LossTrace::epoch_means(int stage) const {
  std::map<int, std::pair<double, int>> acc;
  for (const auto& r : rows) {
    if (r.stage != stage) continue;
    auto& a = acc[r.epoch];
    a.first += r.loss;
    a.second += 1;
  }
  std::vector<double> out;
  for (const auto& [epoch, a] : acc) out.push_back(a.first / a.second);
  return out;
}

void LossTrace::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write loss trace " + path.string());
  out << "stage,epoch,video_id,loss,components\n" << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.stage << ',' << r.epoch << ',' << r.video_id << ',' << r.loss << ',';
    if (r.stage == 1) {
      out << "corr=" << r.c1 << ";sd1=" << r.c2 << ";sd2=" << r.c3;
    } else {
      out << "ptrim=" << r.c1 << ";rep=" << r.c2 << ";pctrim=" << r.c3 << ";sd=" << r.c4;
    }
    out << '\n';
  }
}

Eigen::Index feature_dim(const Dataset& dataset, const std::vector<std::string>& ids) {
  if (ids.empty()) throw std::invalid_argument("no training videos");
  const auto d = dataset.at(ids.front()).sequence.dim();
  for (const auto& id : ids) {
    if (dataset.at(id).sequence.dim() != d) {
      throw ValidationError("video '" + id + "': feature dimension differs from '" + ids.front() + "'");
    }
  }
  return d;
}

namespace {

std::string where(int stage, int epoch, const std::string& id) {
  return "stage " + std::to_string(stage) + ", epoch " + std::to_string(epoch) + ", video '" + id + "'";
}

ForwardCache forward_checked(const ScoringModel& m, const FeatureMatrix& x, int stage, int epoch, const std::string& id) {
  try {
    return forward(m, x);
  } catch (const DivergenceError& ex) {
    throw DivergenceError(where(stage, epoch, id) + ": " + ex.what());
  }
}

void check_finite(double loss, const Eigen::VectorXd& grad, int stage, int epoch, const std::string& id) {
  if (!std::isfinite(loss) || !grad.allFinite()) throw DivergenceError(where(stage, epoch, id) + ": non-finite loss");
}

void check_params(const ScoringModel& m, int stage, int epoch, const std::string& id) {
  if (!m.parameters().allFinite()) throw DivergenceError(where(stage, epoch, id) + ": non-finite parameters");
}

}  // namespace

ScoringModel pretrain(ScoringModel model, const Dataset& dataset, const std::vector<std::string>& ids,
                      const TrainConfig& cfg, LossTrace* trace) {
  if (ids.empty()) throw std::invalid_argument("pretrain: empty training set");
  if (cfg.stage1_epochs == 0) return model;
  Rng order_rng(derive_seed(cfg.seed, "stage1_order"));
  Rng mask_rng(derive_seed(cfg.seed, "stage1_mask"));
  const auto adam_cfg = cfg.adam();
  AdamState state(model);
  ScoringModel grads(model.input_dim());
  std::vector<std::string> order = ids;
  for (int epoch = 1; epoch <= cfg.stage1_epochs; ++epoch) {
    if (cfg.shuffle) shuffle(order, order_rng);
    for (const auto& id : order) {
      const auto& x = dataset.at(id).sequence.features;
      const auto views = mask_views(x, mask_rng, cfg.mask_lo, cfg.mask_hi);
      const auto c1 = forward_checked(model, views.first, 1, epoch, id);
      const auto c2 = forward_checked(model, views.second, 1, epoch, id);
      const auto loss = loss_pre(c1.scores, c2.scores, cfg.weights.nu);
      check_finite(loss.value, loss.grad_a, 1, epoch, id);
      check_finite(loss.value, loss.grad_b, 1, epoch, id);
      grads.set_zero();
      backward(model, c1, loss.grad_a, grads);
      backward(model, c2, loss.grad_b, grads);
      adam_step(model, grads, state, adam_cfg);
      check_params(model, 1, epoch, id);
      if (trace) {
        const double corr = loss_corr(c1.scores, c2.scores).value;
        trace->rows.push_back({1, epoch, id, loss.value, corr, loss_sd(c1.scores).value, loss_sd(c2.scores).value, 0.0});
      }
    }
  }
  return model;
}

ScoringModel pretrain(const Dataset& dataset, const std::vector<std::string>& ids, const TrainConfig& cfg,
                      LossTrace* trace) {
  return pretrain(initial_model(dataset, cfg), dataset, ids, cfg, trace);
}

ScoringModel finetune(ScoringModel model, const Dataset& dataset, const std::vector<std::string>& ids,
                      const TrainConfig& cfg, LossTrace* trace) {
  if (ids.empty()) throw std::invalid_argument("finetune: empty training set");
  if (cfg.stage2_epochs == 0) return model;
  Rng order_rng(derive_seed(cfg.seed, "stage2_order"));
  const auto adam_cfg = cfg.adam();
  AdamState state(model);
  ScoringModel grads(model.input_dim());
  std::vector<std::string> order = ids;
  for (int epoch = 1; epoch <= cfg.stage2_epochs; ++epoch) {
    if (cfg.shuffle) shuffle(order, order_rng);
    for (const auto& id : order) {
      const auto& rec = dataset.at(id);
      const auto& x = rec.sequence.features;
      const auto cache = forward_checked(model, x, 2, epoch, id);
      const Eigen::Map<const Eigen::VectorXd> delta(rec.metrics.ptri.data(), static_cast<Eigen::Index>(rec.metrics.ptri.size()));
      const Eigen::Map<const Eigen::VectorXd> gamma(rec.metrics.pctri.data(),
                                                    static_cast<Eigen::Index>(rec.metrics.pctri.size()));
      const auto loss = loss_unsup(cache.scores, delta, gamma, x, cfg.weights, cfg.sinkhorn);
      check_finite(loss.value, loss.grad, 2, epoch, id);
      grads.set_zero();
      backward(model, cache, loss.grad, grads);
      adam_step(model, grads, state, adam_cfg);
      check_params(model, 2, epoch, id);
      if (trace) trace->rows.push_back({2, epoch, id, loss.value, loss.ptrim, loss.rep, loss.pctrim, loss.sd});
    }
  }
  return model;
}

ScoringModel initial_model(const Dataset& dataset, const TrainConfig& cfg) {
  return init_params(cfg.seed, feature_dim(dataset, dataset.ids()));
}

TrainedFold train_two_stage(const Dataset& dataset, const std::vector<std::string>& ids, const TrainConfig& cfg,
                            const ScoringModel* shared_pretrained) {
  validate(cfg);
  feature_dim(dataset, ids);
  TrainedFold out;
  ScoringModel model = shared_pretrained ? *shared_pretrained : initial_model(dataset, cfg);
  out.init_hash = model.hash();
  if (cfg.stage1 && !shared_pretrained) model = pretrain(std::move(model), dataset, ids, cfg, &out.trace);
  out.stage2_init_hash = model.hash();
  if (cfg.stage2) model = finetune(std::move(model), dataset, ids, cfg, &out.trace);
  out.model = std::move(model);
  return out;
}

}  // namespace vsum
