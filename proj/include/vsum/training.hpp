#pragma once

#include "vsum/dataset.hpp"
#include "vsum/losses.hpp"
#include "vsum/model.hpp"
#include "vsum/random.hpp"
#include "vsum/sinkhorn.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace vsum {

enum class PretrainScope {
  train_fold,  // each fold pretrains on its own training videos
  all_videos,  // one pretraining pass over every video, shared by all folds
};

PretrainScope parse_pretrain_scope(const std::string& s);
std::string to_string(PretrainScope s);

struct TrainConfig {
  int stage1_epochs = 60;
  int stage2_epochs = 90;
  bool stage1 = true;
  bool stage2 = true;
  double lr = 1e-5;
  double weight_decay = 1e-5;
  double mask_lo = 0.15;
  double mask_hi = 0.50;
  LossWeights weights;  // nu is the stage-1 diversity weight
  SinkhornConfig sinkhorn;
  std::uint64_t seed = 0;
  bool shuffle = true;
  PretrainScope pretrain_scope = PretrainScope::train_fold;

  AdamConfig adam() const { return AdamConfig{lr, weight_decay, 0.9, 0.999, 1e-8}; }
};

/// Throws ConfigError naming the offending field.
void validate(const TrainConfig& cfg);

struct MaskedViews {
  FeatureMatrix first;
  FeatureMatrix second;
  std::vector<std::size_t> masked_first;   // sorted row indices set to zero
  std::vector<std::size_t> masked_second;
  double ratio = 0.0;
};

/// Draws one ratio m in [lo, hi] and masks min(round(m N), N - 1) rows in each
/// of two independent views.
MaskedViews mask_views(const FeatureMatrix& features, Rng& rng, double lo, double hi);

struct LossTraceRow {
  int stage = 0;
  int epoch = 0;  // 1-based
  std::string video_id;
  double loss = 0.0;
  // Stage 1: corr, sd of each view. Stage 2: ptrim, rep, pctrim, sd.
  double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0;
};

struct LossTrace {
  std::vector<LossTraceRow> rows;

  /// Mean loss per epoch of the given stage, in epoch order.
  std::vector<double> epoch_means(int stage) const;
  void write_csv(const std::filesystem::path& path) const;
};

/// Input dimension shared by the given videos; throws ValidationError on mismatch.
Eigen::Index feature_dim(const Dataset& dataset, const std::vector<std::string>& ids);

/// Stage 1: masked-view correlation pretraining, one Adam step per video.
ScoringModel pretrain(ScoringModel model, const Dataset& dataset, const std::vector<std::string>& train_ids,
                      const TrainConfig& cfg, LossTrace* trace = nullptr);

/// Stage 1 from a fresh initialization.
ScoringModel pretrain(const Dataset& dataset, const std::vector<std::string>& train_ids, const TrainConfig& cfg,
                      LossTrace* trace = nullptr);

/// Stage 2: the unified unsupervised loss on unmasked features, fresh Adam state.
ScoringModel finetune(ScoringModel model, const Dataset& dataset, const std::vector<std::string>& train_ids,
                      const TrainConfig& cfg, LossTrace* trace = nullptr);

/// The initialization every fold of a run starts from.
ScoringModel initial_model(const Dataset& dataset, const TrainConfig& cfg);

struct TrainedFold {
  ScoringModel model;
  std::string init_hash;      // parameters entering the first enabled stage
  std::string stage2_init_hash;  // parameters entering stage 2
  LossTrace trace;
};

/// Stage 1 (if enabled) then stage 2 (if enabled). With `shared_pretrained`
/// set, stage 1 is skipped and that checkpoint seeds stage 2.
TrainedFold train_two_stage(const Dataset& dataset, const std::vector<std::string>& train_ids, const TrainConfig& cfg,
                            const ScoringModel* shared_pretrained = nullptr);

}  // namespace vsum
