#include "vsum/config.hpp"

#include "vsum/errors.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace vsum {

using nlohmann::json;

DatasetProfile parse_dataset_profile(const std::string& s) {
  if (s == "tvsum") return DatasetProfile::tvsum;
  if (s == "summe") return DatasetProfile::summe;
  if (s == "custom") return DatasetProfile::custom;
  throw ConfigError("dataset_profile: expected 'tvsum', 'summe' or 'custom', got '" + s + "'");
}

std::string to_string(DatasetProfile p) {
  switch (p) {
    case DatasetProfile::tvsum: return "tvsum";
    case DatasetProfile::summe: return "summe";
    case DatasetProfile::custom: return "custom";
  }
  return "custom";
}

ExperimentConfig profile_defaults(DatasetProfile p) {
  ExperimentConfig c;
  c.profile = p;
  switch (p) {
    case DatasetProfile::tvsum:
      c.train.weights = {1.0, 5.0, 0.0, 0.005};
      c.eval.correlation_target = CorrelationTarget::annotators;
      c.eval.f1_mode = F1Mode::mean;
      break;
    case DatasetProfile::summe:
      c.train.weights = {1.0, 0.0, 0.5, 0.0005};
      c.eval.correlation_target = CorrelationTarget::gt_score;
      c.eval.f1_mode = F1Mode::max;
      break;
    case DatasetProfile::custom:
      c.train.weights = {1.0, 0.0, 0.0, 0.005};
      break;
  }
  return c;
}

namespace {

template <typename T>
T get_as(const json& v, const std::string& key, const char* expected) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "': expected " + expected + ", got " + v.dump());
  }
}

double num(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError("config key '" + key + "': expected a number, got " + v.dump());
  return v.get<double>();
}

int integer(const json& v, const std::string& key) {
  if (!v.is_number_integer()) throw ConfigError("config key '" + key + "': expected an integer, got " + v.dump());
  return v.get<int>();
}

std::uint64_t unsigned_integer(const json& v, const std::string& key) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw ConfigError("config key '" + key + "': expected a non-negative integer, got " + v.dump());
  }
  return v.get<std::uint64_t>();
}

bool boolean(const json& v, const std::string& key) {
  if (!v.is_boolean()) throw ConfigError("config key '" + key + "': expected true or false, got " + v.dump());
  return v.get<bool>();
}

std::string str(const json& v, const std::string& key) { return get_as<std::string>(v, key, "a string"); }

// Re-throws enum parse failures with the key in the message.
template <typename F>
auto keyed(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError& ex) {
    const std::string msg = ex.what();
    if (msg.rfind("config key", 0) == 0) throw;
    throw ConfigError("config key '" + key + "': " + msg);
  }
}

using Setter = std::function<void(ExperimentConfig&, const json&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"seed", [](auto& c, const json& v, const auto& k) { c.eval.seed = unsigned_integer(v, k); }},
      {"split_seed", [](auto& c, const json& v, const auto& k) { c.eval.split_seed = unsigned_integer(v, k); }},
      {"runs", [](auto& c, const json& v, const auto& k) { c.eval.runs = integer(v, k); }},
      {"n_folds", [](auto& c, const json& v, const auto& k) { c.eval.n_folds = integer(v, k); }},
      {"jobs", [](auto& c, const json& v, const auto& k) { c.eval.jobs = integer(v, k); }},
      {"splits", [](auto& c, const json& v, const auto& k) { c.eval.splits_path = str(v, k); }},
      {"correlation_target",
       [](auto& c, const json& v, const auto& k) {
         c.eval.correlation_target = keyed(k, [&] { return parse_correlation_target(str(v, k)); });
       }},
      {"f1_mode",
       [](auto& c, const json& v, const auto& k) { c.eval.f1_mode = keyed(k, [&] { return parse_f1_mode(str(v, k)); }); }},
      {"compute_f1", [](auto& c, const json& v, const auto& k) { c.eval.compute_f1 = boolean(v, k); }},
      {"stage1_epochs", [](auto& c, const json& v, const auto& k) { c.train.stage1_epochs = integer(v, k); }},
      {"stage2_epochs", [](auto& c, const json& v, const auto& k) { c.train.stage2_epochs = integer(v, k); }},
      {"stage1", [](auto& c, const json& v, const auto& k) { c.train.stage1 = boolean(v, k); }},
      {"stage2", [](auto& c, const json& v, const auto& k) { c.train.stage2 = boolean(v, k); }},
      {"lr", [](auto& c, const json& v, const auto& k) { c.train.lr = num(v, k); }},
      {"weight_decay", [](auto& c, const json& v, const auto& k) { c.train.weight_decay = num(v, k); }},
      {"mask_range",
       [](auto& c, const json& v, const auto& k) {
         if (!v.is_array() || v.size() != 2) throw ConfigError("config key '" + k + "': expected [lo, hi]");
         c.train.mask_lo = num(v[0], k);
         c.train.mask_hi = num(v[1], k);
       }},
      {"nu", [](auto& c, const json& v, const auto& k) { c.train.weights.nu = num(v, k); }},
      {"w_ptrim", [](auto& c, const json& v, const auto& k) { c.train.weights.w_ptrim = num(v, k); }},
      {"w_rep", [](auto& c, const json& v, const auto& k) { c.train.weights.w_rep = num(v, k); }},
      {"w_pctrim", [](auto& c, const json& v, const auto& k) { c.train.weights.w_pctrim = num(v, k); }},
      {"sinkhorn_epsilon", [](auto& c, const json& v, const auto& k) { c.train.sinkhorn.epsilon = num(v, k); }},
      {"sinkhorn_max_iters", [](auto& c, const json& v, const auto& k) { c.train.sinkhorn.max_iters = integer(v, k); }},
      {"sinkhorn_tolerance", [](auto& c, const json& v, const auto& k) { c.train.sinkhorn.tolerance = num(v, k); }},
      {"sinkhorn_debiased", [](auto& c, const json& v, const auto& k) { c.train.sinkhorn.debiased = boolean(v, k); }},
      {"shuffle", [](auto& c, const json& v, const auto& k) { c.train.shuffle = boolean(v, k); }},
      {"pretrain_scope",
       [](auto& c, const json& v, const auto& k) {
         c.train.pretrain_scope = keyed(k, [&] { return parse_pretrain_scope(str(v, k)); });
       }},
      {"budget_ratio", [](auto& c, const json& v, const auto& k) { c.summary.budget_ratio = num(v, k); }},
      {"kts_penalty", [](auto& c, const json& v, const auto& k) { c.summary.kts_penalty = num(v, k); }},
      {"kts_max_segments", [](auto& c, const json& v, const auto& k) { c.summary.kts_max_segments = integer(v, k); }},
      {"fps", [](auto& c, const json& v, const auto& k) { c.summary.fps = num(v, k); }},
      {"knapsack_value",
       [](auto& c, const json& v, const auto& k) {
         c.summary.knapsack_value = keyed(k, [&] { return parse_knapsack_value(str(v, k)); });
       }},
  };
  return table;
}

}  // namespace

ExperimentConfig config_from_json(const json& input) {
  if (!input.is_object()) throw ConfigError("config must be a JSON object");
  const json& j = input.contains("config") && input["config"].is_object() ? input["config"] : input;
  DatasetProfile profile = DatasetProfile::custom;
  if (j.contains("dataset_profile")) {
    profile = keyed("dataset_profile", [&] { return parse_dataset_profile(str(j["dataset_profile"], "dataset_profile")); });
  }
  ExperimentConfig c = profile_defaults(profile);
  const auto& table = setters();
  for (const auto& [key, value] : j.items()) {
    if (key == "dataset_profile") continue;
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(c, value, key);
  }
  c.train.seed = c.eval.seed;
  validate(c);
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j = {
      {"dataset_profile", to_string(c.profile)},
      {"seed", c.eval.seed},
      {"runs", c.eval.runs},
      {"n_folds", c.eval.n_folds},
      {"jobs", c.eval.jobs},
      {"splits", c.eval.splits_path},
      {"correlation_target", to_string(c.eval.correlation_target)},
      {"f1_mode", to_string(c.eval.f1_mode)},
      {"compute_f1", c.eval.compute_f1},
      {"stage1_epochs", c.train.stage1_epochs},
      {"stage2_epochs", c.train.stage2_epochs},
      {"stage1", c.train.stage1},
      {"stage2", c.train.stage2},
      {"lr", c.train.lr},
      {"weight_decay", c.train.weight_decay},
      {"mask_range", {c.train.mask_lo, c.train.mask_hi}},
      {"nu", c.train.weights.nu},
      {"w_ptrim", c.train.weights.w_ptrim},
      {"w_rep", c.train.weights.w_rep},
      {"w_pctrim", c.train.weights.w_pctrim},
      {"sinkhorn_epsilon", c.train.sinkhorn.epsilon},
      {"sinkhorn_max_iters", c.train.sinkhorn.max_iters},
      {"sinkhorn_tolerance", c.train.sinkhorn.tolerance},
      {"sinkhorn_debiased", c.train.sinkhorn.debiased},
      {"shuffle", c.train.shuffle},
      {"pretrain_scope", to_string(c.train.pretrain_scope)},
      {"budget_ratio", c.summary.budget_ratio},
      {"kts_penalty", c.summary.kts_penalty},
      {"kts_max_segments", c.summary.kts_max_segments},
      {"fps", c.summary.fps},
      {"knapsack_value", to_string(c.summary.knapsack_value)},
  };
  if (c.eval.split_seed) j["split_seed"] = *c.eval.split_seed;
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::parse_error& ex) {
    throw ConfigError("config file " + path.string() + ": " + ex.what());
  }
  return config_from_json(j);
}

void validate(const ExperimentConfig& c) {
  validate(c.train);
  if (c.eval.runs < 1) throw ConfigError("runs: must be >= 1");
  if (c.eval.n_folds < 2) throw ConfigError("n_folds: must be >= 2");
  if (c.eval.jobs < 1) throw ConfigError("jobs: must be >= 1");
  if (!(c.summary.budget_ratio > 0.0 && c.summary.budget_ratio <= 1.0)) throw ConfigError("budget_ratio: must be in (0, 1]");
  if (!(c.summary.kts_penalty >= 0.0)) throw ConfigError("kts_penalty: must be >= 0");
  if (c.summary.kts_max_segments < 0) throw ConfigError("kts_max_segments: must be >= 0 (0 selects the default)");
  if (!(c.summary.fps > 0.0)) throw ConfigError("fps: must be positive");
}

std::string config_hash(const ExperimentConfig& c) {
  auto j = config_to_json(c);
  j.erase("jobs");  // parallelism does not change results
  return to_hex(fnv1a64(j.dump()));
}

}  // namespace vsum
