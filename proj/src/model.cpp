#include "vsum/model.hpp"

#include "vsum/errors.hpp"
#include "vsum/random.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace vsum {

ScoringModel::Offsets ScoringModel::offsets(Eigen::Index d) {
  Offsets o{};
  Eigen::Index at = 0;
  for (int k = 0; k < kConvTaps; ++k) {
    o.conv[k] = at;
    at += kConvChannels * d;
  }
  o.conv_b = at;
  at += kConvChannels;
  o.fc1_w = at;
  at += kHidden1 * kConvChannels;
  o.fc1_b = at;
  at += kHidden1;
  o.fc2_w = at;
  at += kHidden2 * kHidden1;
  o.fc2_b = at;
  at += kHidden2;
  o.fc3_w = at;
  at += kHidden2;
  o.fc3_b = at;
  at += 1;
  o.total = at;
  return o;
}

Eigen::Index ScoringModel::parameter_count(Eigen::Index d) { return offsets(d).total; }

ScoringModel::ScoringModel(Eigen::Index input_dim)
    : input_dim_(input_dim), off_(offsets(input_dim)), params_(Eigen::VectorXd::Zero(off_.total)) {
  if (input_dim < 1) throw std::invalid_argument("ScoringModel: input dimension must be positive");
}

ScoringModel::MatrixMap ScoringModel::conv_tap(int k) { return {params_.data() + off_.conv[k], kConvChannels, input_dim_}; }
ScoringModel::ConstMatrixMap ScoringModel::conv_tap(int k) const {
  return {params_.data() + off_.conv[k], kConvChannels, input_dim_};
}
ScoringModel::VectorMap ScoringModel::conv_bias() { return {params_.data() + off_.conv_b, kConvChannels}; }
ScoringModel::ConstVectorMap ScoringModel::conv_bias() const { return {params_.data() + off_.conv_b, kConvChannels}; }
ScoringModel::MatrixMap ScoringModel::fc1_weight() { return {params_.data() + off_.fc1_w, kHidden1, kConvChannels}; }
ScoringModel::ConstMatrixMap ScoringModel::fc1_weight() const {
  return {params_.data() + off_.fc1_w, kHidden1, kConvChannels};
}
ScoringModel::VectorMap ScoringModel::fc1_bias() { return {params_.data() + off_.fc1_b, kHidden1}; }
ScoringModel::ConstVectorMap ScoringModel::fc1_bias() const { return {params_.data() + off_.fc1_b, kHidden1}; }
ScoringModel::MatrixMap ScoringModel::fc2_weight() { return {params_.data() + off_.fc2_w, kHidden2, kHidden1}; }
ScoringModel::ConstMatrixMap ScoringModel::fc2_weight() const { return {params_.data() + off_.fc2_w, kHidden2, kHidden1}; }
ScoringModel::VectorMap ScoringModel::fc2_bias() { return {params_.data() + off_.fc2_b, kHidden2}; }
ScoringModel::ConstVectorMap ScoringModel::fc2_bias() const { return {params_.data() + off_.fc2_b, kHidden2}; }
ScoringModel::MatrixMap ScoringModel::fc3_weight() { return {params_.data() + off_.fc3_w, 1, kHidden2}; }
ScoringModel::ConstMatrixMap ScoringModel::fc3_weight() const { return {params_.data() + off_.fc3_w, 1, kHidden2}; }
ScoringModel::VectorMap ScoringModel::fc3_bias() { return {params_.data() + off_.fc3_b, 1}; }
ScoringModel::ConstVectorMap ScoringModel::fc3_bias() const { return {params_.data() + off_.fc3_b, 1}; }

std::string ScoringModel::hash() const {
  auto h = fnv1a64(&input_dim_, sizeof(input_dim_));
  h = fnv1a64(params_.data(), static_cast<std::size_t>(params_.size()) * sizeof(double), h);
  return to_hex(h);
}

ScoringModel init_params(std::uint64_t seed, Eigen::Index input_dim) {
  if (input_dim < 2) throw std::invalid_argument("init_params: input dimension must be at least 2");
  ScoringModel m(input_dim);
  Rng rng(derive_seed(seed, "init_params"));
  auto fill = [&rng](auto&& block, double fan_in) {
    const double bound = 1.0 / std::sqrt(fan_in);
    for (Eigen::Index j = 0; j < block.cols(); ++j)
      for (Eigen::Index i = 0; i < block.rows(); ++i) block(i, j) = uniform(rng, -bound, bound);
  };
  const double conv_fan_in = static_cast<double>(kConvTaps * input_dim);
  for (int k = 0; k < kConvTaps; ++k) fill(m.conv_tap(k), conv_fan_in);
  fill(m.fc1_weight(), static_cast<double>(kConvChannels));
  fill(m.fc2_weight(), static_cast<double>(kHidden1));
  fill(m.fc3_weight(), static_cast<double>(kHidden2));
  return m;
}

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

ForwardCache forward(const ScoringModel& model, const FeatureMatrix& features) {
  const auto n = features.rows();
  if (n < 1) throw std::invalid_argument("forward: empty sequence");
  if (features.cols() != model.input_dim()) {
    throw std::invalid_argument("forward: feature dimension " + std::to_string(features.cols()) +
                                " does not match model input " + std::to_string(model.input_dim()));
  }
  ForwardCache c;
  c.input = features;

  // Zero padding of one frame on each side keeps the length at N.
  c.conv_pre.noalias() = features * model.conv_tap(1).transpose();
  if (n > 1) {
    c.conv_pre.bottomRows(n - 1).noalias() += features.topRows(n - 1) * model.conv_tap(0).transpose();
    c.conv_pre.topRows(n - 1).noalias() += features.bottomRows(n - 1) * model.conv_tap(2).transpose();
  }
  c.conv_pre.rowwise() += model.conv_bias().transpose();
  c.conv_act = c.conv_pre.cwiseMax(0.0);

  c.fc1_pre.noalias() = c.conv_act * model.fc1_weight().transpose();
  c.fc1_pre.rowwise() += model.fc1_bias().transpose();
  c.fc1_act = c.fc1_pre.cwiseMax(0.0);

  c.fc2_pre.noalias() = c.fc1_act * model.fc2_weight().transpose();
  c.fc2_pre.rowwise() += model.fc2_bias().transpose();
  c.fc2_act = c.fc2_pre.cwiseMax(0.0);

  c.logits = c.fc2_act * model.fc3_weight().row(0).transpose();
  c.logits.array() += model.fc3_bias()(0);
  if (!c.logits.allFinite()) throw DivergenceError("forward: non-finite activations");
  c.scores = c.logits.unaryExpr([](double z) { return sigmoid(z); });
  return c;
}

Eigen::VectorXd score_frames(const ScoringModel& model, const FeatureMatrix& features) {
  return forward(model, features).scores;
}

void backward(const ScoringModel& model, const ForwardCache& c, const Eigen::VectorXd& dl_dp, ScoringModel& grads) {
  const auto n = c.length();
  if (dl_dp.size() != n) throw std::invalid_argument("backward: dL/dp length does not match the cached sequence");
  if (grads.input_dim() != model.input_dim() || c.input.cols() != model.input_dim()) {
    throw std::invalid_argument("backward: shape mismatch between model, cache and gradient buffer");
  }

  const Eigen::VectorXd dz3 = (dl_dp.array() * c.scores.array() * (1.0 - c.scores.array())).matrix();
  grads.fc3_weight().row(0).noalias() += dz3.transpose() * c.fc2_act;
  grads.fc3_bias()(0) += dz3.sum();

  // ReLU subgradient at 0 is 0.
  Eigen::MatrixXd dz2 = dz3 * model.fc3_weight().row(0);
  dz2.array() *= (c.fc2_pre.array() > 0.0).cast<double>();
  grads.fc2_weight().noalias() += dz2.transpose() * c.fc1_act;
  grads.fc2_bias() += dz2.colwise().sum().transpose();

  Eigen::MatrixXd dz1 = dz2 * model.fc2_weight();
  dz1.array() *= (c.fc1_pre.array() > 0.0).cast<double>();
  grads.fc1_weight().noalias() += dz1.transpose() * c.conv_act;
  grads.fc1_bias() += dz1.colwise().sum().transpose();

  Eigen::MatrixXd dz0 = dz1 * model.fc1_weight();
  dz0.array() *= (c.conv_pre.array() > 0.0).cast<double>();
  grads.conv_tap(1).noalias() += dz0.transpose() * c.input;
  if (n > 1) {
    grads.conv_tap(0).noalias() += dz0.bottomRows(n - 1).transpose() * c.input.topRows(n - 1);
    grads.conv_tap(2).noalias() += dz0.topRows(n - 1).transpose() * c.input.bottomRows(n - 1);
  }
  grads.conv_bias() += dz0.colwise().sum().transpose();
}

ScoringModel backward(const ScoringModel& model, const ForwardCache& cache, const Eigen::VectorXd& dl_dp) {
  ScoringModel grads(model.input_dim());
  backward(model, cache, dl_dp, grads);
  return grads;
}

AdamState::AdamState(const ScoringModel& model)
    : first_moment(Eigen::VectorXd::Zero(model.parameters().size())),
      second_moment(Eigen::VectorXd::Zero(model.parameters().size())) {}

void adam_step(ScoringModel& model, const ScoringModel& grads, AdamState& state, const AdamConfig& cfg) {
  auto& theta = model.parameters();
  const auto& g = grads.parameters();
  if (g.size() != theta.size() || state.first_moment.size() != theta.size() || state.second_moment.size() != theta.size()) {
    throw std::invalid_argument("adam_step: shape mismatch");
  }
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  const double b1 = cfg.beta1, b2 = cfg.beta2, lr = cfg.lr, wd = cfg.weight_decay, eps = cfg.eps;
  double* __restrict m = state.first_moment.data();
  double* __restrict v = state.second_moment.data();
  double* __restrict w = theta.data();
  const double* __restrict gr = g.data();
  const Eigen::Index n = theta.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double gi = gr[i] + wd * w[i];
    m[i] = b1 * m[i] + (1.0 - b1) * gi;
    v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
    w[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
  }
}

namespace {

constexpr char kMagic[8] = {'V', 'S', 'U', 'M', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw LoadError("checkpoint truncated");
  return v;
}

void put_string(std::ostream& os, const std::string& s) {
  put<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& is) {
  const auto n = get<std::uint32_t>(is);
  if (n > (1u << 20)) throw LoadError("checkpoint string field too long");
  std::string s(n, '\0');
  is.read(s.data(), n);
  if (!is) throw LoadError("checkpoint truncated");
  return s;
}

void put_vector(std::ostream& os, const Eigen::VectorXd& v) {
  os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void get_vector(std::istream& is, Eigen::VectorXd& v) {
  is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!is) throw LoadError("checkpoint truncated");
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  static_assert(std::endian::native == std::endian::little, "checkpoint format is little-endian");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write checkpoint " + path.string());
  os.write(kMagic, sizeof(kMagic));
  put(os, kCheckpointVersion);
  put<std::int64_t>(os, ckpt.model.input_dim());
  put<std::int64_t>(os, ckpt.model.parameters().size());
  put_string(os, ckpt.config_hash);
  put_string(os, ckpt.stage);
  put_vector(os, ckpt.model.parameters());
  put<std::uint8_t>(os, ckpt.adam ? 1 : 0);
  if (ckpt.adam) {
    put<std::int64_t>(os, ckpt.adam->step);
    put_vector(os, ckpt.adam->first_moment);
    put_vector(os, ckpt.adam->second_moment);
  }
  if (!os) throw DataError("write failed for checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw LoadError("cannot open checkpoint " + path.string());
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw LoadError(path.string() + " is not a checkpoint file");
  const auto version = get<std::uint32_t>(is);
  if (version != kCheckpointVersion) throw LoadError("unsupported checkpoint version " + std::to_string(version));
  const auto d = get<std::int64_t>(is);
  const auto count = get<std::int64_t>(is);
  if (d < 1 || count != ScoringModel::parameter_count(d)) throw LoadError("checkpoint parameter count does not match its input dimension");
  Checkpoint ckpt;
  ckpt.config_hash = get_string(is);
  ckpt.stage = get_string(is);
  ckpt.model = ScoringModel(d);
  get_vector(is, ckpt.model.parameters());
  if (get<std::uint8_t>(is) != 0) {
    AdamState st(ckpt.model);
    st.step = get<std::int64_t>(is);
    get_vector(is, st.first_moment);
    get_vector(is, st.second_moment);
    ckpt.adam = std::move(st);
  }
  if (!ckpt.model.parameters().allFinite()) throw LoadError("checkpoint contains non-finite parameters");
  return ckpt;
}

}  // namespace vsum
