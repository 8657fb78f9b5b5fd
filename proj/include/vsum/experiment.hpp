#pragma once

#include "vsum/config.hpp"
#include "vsum/dataset.hpp"
#include "vsum/splits.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace vsum {

enum class ControlMode {
  none,
  random_init,  // untrained network
  sd_only,      // stage 2 with the diversity term alone
};

ControlMode parse_control_mode(const std::string& s);
std::string to_string(ControlMode m);

struct EvalRow {
  int run = 0;  // 0-based
  int fold = 0;
  std::string video_id;
  double tau = 0.0;
  double rho = 0.0;
  std::optional<double> f1;
};

struct Stat {
  double mean = 0.0;
  double stddev = 0.0;  // sample stddev (n - 1) of the per-run means; 0 for one run
};

struct FoldModelInfo {
  int run = 0;
  int fold = 0;
  std::string init_hash;
  std::string stage2_init_hash;
  std::string final_hash;
};

struct EvalReport {
  std::string config_hash;
  std::string split_reference;
  std::string control = "none";
  int runs = 0;
  int n_folds = 0;
  std::vector<std::uint64_t> run_seeds;
  std::vector<EvalRow> rows;  // ordered by run, fold, video id
  std::vector<FoldModelInfo> models;

  std::vector<double> run_means_tau() const;
  std::vector<double> run_means_rho() const;
  std::vector<double> run_means_f1() const;  // empty when no F1 was computed
  Stat tau() const;
  Stat rho() const;
  std::optional<Stat> f1() const;

  nlohmann::json to_json() const;
  std::string to_csv() const;
  void write(const std::filesystem::path& json_path, const std::filesystem::path& csv_path) const;
};

/// Mean and sample stddev.
Stat summarize_values(const std::vector<double>& v);

/// Reads cfg.eval.splits_path when set, else generates folds from the split seed.
SplitSpec resolve_splits(const Dataset& dataset, const ExperimentConfig& cfg, std::string* reference = nullptr);

/// For each run r (seed = cfg.eval.seed + r): train one model per fold, score
/// that fold's test videos, and record tau, rho and (when user summaries
/// exist) F1. Folds and runs are spread over cfg.eval.jobs threads; the
/// report does not depend on the thread count.
EvalReport run_experiment(const Dataset& dataset, const ExperimentConfig& cfg, ControlMode control = ControlMode::none);

/// Both controls, each evaluated exactly as run_experiment does.
struct ControlReports {
  EvalReport random_init;
  EvalReport sd_only;
};
ControlReports random_controls(const Dataset& dataset, const ExperimentConfig& cfg);

enum class SweepAxis { mask_ratio, nu, w_rep, w_pctrim };

SweepAxis parse_sweep_axis(const std::string& s);
std::string to_string(SweepAxis a);

/// Returns a copy of cfg with the axis set to value. A mask ratio v sets the
/// mask range to [v, v].
ExperimentConfig apply_sweep_value(ExperimentConfig cfg, SweepAxis axis, double value);

struct SweepRow {
  double value = 0.0;
  Stat tau;
  Stat rho;
};

std::vector<SweepRow> run_sweep(const Dataset& dataset, const ExperimentConfig& cfg, SweepAxis axis,
                                const std::vector<double>& values);
std::string sweep_to_csv(SweepAxis axis, const std::vector<SweepRow>& rows);

}  // namespace vsum
