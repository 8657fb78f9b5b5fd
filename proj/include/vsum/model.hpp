#pragma once

#include "vsum/types.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace vsum {

inline constexpr Eigen::Index kConvChannels = 1024;
inline constexpr Eigen::Index kHidden1 = 512;
inline constexpr Eigen::Index kHidden2 = 256;
inline constexpr Eigen::Index kConvTaps = 3;

/// Conv1D(d -> 1024, kernel 3, padding 1, stride 1) -> ReLU -> FC(1024 -> 512)
/// -> ReLU -> FC(512 -> 256) -> ReLU -> FC(256 -> 1) -> sigmoid.
///
/// All parameters live in one contiguous vector; tensors are mapped views into
/// it. Layout, in order: conv taps k = 0, 1, 2 (each 1024 x d, column-major,
/// tap k multiplies frame t + k - 1), conv bias, fc1 weight (512 x 1024), fc1
/// bias, fc2 weight (256 x 512), fc2 bias, fc3 weight (1 x 256), fc3 bias.
/// Gradients use the same type.
class ScoringModel {
 public:
  using MatrixMap = Eigen::Map<Eigen::MatrixXd>;
  using ConstMatrixMap = Eigen::Map<const Eigen::MatrixXd>;
  using VectorMap = Eigen::Map<Eigen::VectorXd>;
  using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

  ScoringModel() = default;
  /// All-zero parameters for input dimension d >= 1.
  explicit ScoringModel(Eigen::Index input_dim);

  Eigen::Index input_dim() const noexcept { return input_dim_; }
  static Eigen::Index parameter_count(Eigen::Index input_dim);

  Eigen::VectorXd& parameters() noexcept { return params_; }
  const Eigen::VectorXd& parameters() const noexcept { return params_; }

  MatrixMap conv_tap(int k);
  ConstMatrixMap conv_tap(int k) const;
  VectorMap conv_bias();
  ConstVectorMap conv_bias() const;
  MatrixMap fc1_weight();
  ConstMatrixMap fc1_weight() const;
  VectorMap fc1_bias();
  ConstVectorMap fc1_bias() const;
  MatrixMap fc2_weight();
  ConstMatrixMap fc2_weight() const;
  VectorMap fc2_bias();
  ConstVectorMap fc2_bias() const;
  MatrixMap fc3_weight();
  ConstMatrixMap fc3_weight() const;
  VectorMap fc3_bias();
  ConstVectorMap fc3_bias() const;

  /// Conv kernel indexed as [out, in, k].
  double conv_weight(Eigen::Index out, Eigen::Index in, int k) const { return conv_tap(k)(out, in); }

  /// FNV-1a over the raw parameter bytes.
  std::string hash() const;

  void set_zero() { params_.setZero(); }

  bool operator==(const ScoringModel& o) const {
    return input_dim_ == o.input_dim_ && params_.size() == o.params_.size() && params_ == o.params_;
  }

  struct Offsets {
    Eigen::Index conv[kConvTaps], conv_b, fc1_w, fc1_b, fc2_w, fc2_b, fc3_w, fc3_b, total;
  };
  static Offsets offsets(Eigen::Index input_dim);

 private:
  Eigen::Index input_dim_ = 0;
  Offsets off_{};
  Eigen::VectorXd params_;
};

/// Weights uniform in +-1/sqrt(fan_in), biases zero. Deterministic in seed.
ScoringModel init_params(std::uint64_t seed, Eigen::Index input_dim);

/// Intermediate values of one forward pass, consumed by backward().
struct ForwardCache {
  FeatureMatrix input;         // N x d
  Eigen::MatrixXd conv_pre;    // N x 1024
  Eigen::MatrixXd conv_act;
  Eigen::MatrixXd fc1_pre;     // N x 512
  Eigen::MatrixXd fc1_act;
  Eigen::MatrixXd fc2_pre;     // N x 256
  Eigen::MatrixXd fc2_act;
  Eigen::VectorXd logits;      // N
  Eigen::VectorXd scores;      // N, sigmoid(logits)

  Eigen::Index length() const noexcept { return input.rows(); }
};

/// Scores for every frame. Throws DivergenceError on non-finite activations
/// and std::invalid_argument on an empty input or dimension mismatch.
ForwardCache forward(const ScoringModel& model, const FeatureMatrix& features);

/// Convenience: forward(...).scores.
Eigen::VectorXd score_frames(const ScoringModel& model, const FeatureMatrix& features);

/// Adds dL/dtheta for the given dL/dp into `grads` (same shape as model).
void backward(const ScoringModel& model, const ForwardCache& cache, const Eigen::VectorXd& dl_dp, ScoringModel& grads);

/// Returns dL/dtheta for the given dL/dp.
ScoringModel backward(const ScoringModel& model, const ForwardCache& cache, const Eigen::VectorXd& dl_dp);

struct AdamConfig {
  double lr = 1e-5;
  double weight_decay = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
  std::int64_t step = 0;

  AdamState() = default;
  explicit AdamState(const ScoringModel& model);
  bool operator==(const AdamState& o) const {
    return step == o.step && first_moment == o.first_moment && second_moment == o.second_moment;
  }
};

/// Bias-corrected Adam; weight decay enters as an L2 term added to the gradient.
void adam_step(ScoringModel& model, const ScoringModel& grads, AdamState& state, const AdamConfig& cfg);

struct Checkpoint {
  ScoringModel model;
  std::optional<AdamState> adam;
  std::string config_hash;
  std::string stage;
};

/// Little-endian binary: "VSUMCKPT", version, dims, config hash, parameters,
/// optional Adam moments.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace vsum
