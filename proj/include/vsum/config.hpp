#pragma once

#include "vsum/evaluation.hpp"
#include "vsum/summarize.hpp"
#include "vsum/training.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace vsum {

enum class DatasetProfile { tvsum, summe, custom };

DatasetProfile parse_dataset_profile(const std::string& s);
std::string to_string(DatasetProfile p);

struct EvalConfig {
  int runs = 10;
  int n_folds = 5;
  std::uint64_t seed = 0;                  // run r trains with seed + r
  std::optional<std::uint64_t> split_seed; // defaults to seed
  int jobs = 1;
  std::string splits_path;                 // reuse these folds when set
  CorrelationTarget correlation_target = CorrelationTarget::annotators;
  F1Mode f1_mode = F1Mode::mean;
  bool compute_f1 = true;

  std::uint64_t effective_split_seed() const { return split_seed.value_or(seed); }
};

struct ExperimentConfig {
  DatasetProfile profile = DatasetProfile::custom;
  TrainConfig train;
  SummaryConfig summary;
  EvalConfig eval;
};

/// Defaults for a profile. tvsum: weights (1, 5, 0), nu 0.005, annotator
/// averaging, mean F1. summe: weights (1, 0, 0.5), nu 0.0005, gt_score, max
/// F1. custom: weights (1, 0, 0), nu 0.005.
ExperimentConfig profile_defaults(DatasetProfile p);

/// Flat JSON object. `dataset_profile` selects defaults, every other key
/// overrides one field. Unknown keys and bad values raise ConfigError naming
/// the key. A run manifest (object with a "config" member) is accepted too.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

void validate(const ExperimentConfig& cfg);

/// FNV-1a of the canonical JSON dump.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace vsum
