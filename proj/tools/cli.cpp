#include "cli.hpp"

#include "vsum/config.hpp"
#include "vsum/dataset.hpp"
#include "vsum/errors.hpp"
#include "vsum/experiment.hpp"
#include "vsum/manifest.hpp"
#include "vsum/model.hpp"
#include "vsum/splits.hpp"
#include "vsum/summarize.hpp"
#include "vsum/training.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

namespace vsum {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::string config;
  std::string dataset;
  std::string splits;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::string out = ".";
  std::string stage = "both";
  std::string control;
  std::string checkpoint;
  std::string video;
  std::string axis;
  std::vector<double> values;
  int fold = 0;
  int folds = 5;
  bool tvsum_names = false;
};

void add_common(CLI::App* cmd, Options& o, bool with_config) {
  if (with_config) cmd->add_option("--config", o.config, "JSON config file (or a run manifest)");
  cmd->add_option("--dataset", o.dataset, "HDF5 container or directory of per-video JSON files");
  cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
}

void add_run_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--splits", o.splits, "Split file to reuse");
  cmd->add_option("--seed", o.seed, "Base seed (overrides the config)");
  cmd->add_option("--jobs", o.jobs, "Concurrent folds/runs")->check(CLI::PositiveNumber);
}

// The config file may be a manifest; then its dataset path is the fallback.
std::pair<ExperimentConfig, json> load_effective_config(const Options& o) {
  json raw = json::object();
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) throw ConfigError("cannot open config file " + o.config);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
      raw = json::parse(ss.str());
    } catch (const json::parse_error& ex) {
      throw ConfigError("config file " + o.config + ": " + ex.what());
    }
  }
  auto cfg = config_from_json(raw);
  if (o.seed) {
    cfg.eval.seed = *o.seed;
    cfg.train.seed = *o.seed;
  }
  if (o.jobs) cfg.eval.jobs = *o.jobs;
  if (!o.splits.empty()) cfg.eval.splits_path = o.splits;
  validate(cfg);
  return {cfg, raw};
}

std::string dataset_path(const Options& o, const json& raw) {
  if (!o.dataset.empty()) return o.dataset;
  if (raw.contains("dataset") && raw["dataset"].contains("path")) return raw["dataset"]["path"].get<std::string>();
  throw ConfigError("--dataset is required");
}

fs::path out_dir(const Options& o) {
  fs::path dir(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir.string());
  return dir;
}

void finish_manifest(RunManifest& m, const WallTimer& timer, const fs::path& path) {
  m.wall_seconds = timer.seconds();
  m.peak_rss_kb = peak_rss_kb();
  m.write(path);
}

int cmd_precompute(const Options& o, std::ostream& out) {
  if (o.dataset.empty()) throw ConfigError("--dataset is required");
  const auto ds = load_dataset(o.dataset);
  std::vector<MetricsCacheEntry> entries;
  for (const auto& [id, rec] : ds.videos()) entries.push_back({id, rec.metrics});
  const auto path = out_dir(o) / "metrics.json";
  write_metrics_cache(path, entries);
  out << "wrote metrics for " << entries.size() << " videos to " << path.string() << '\n';
  return 0;
}

int cmd_train(const Options& o, std::ostream& out) {
  const WallTimer timer;
  auto [cfg, raw] = load_effective_config(o);
  if (o.stage == "1") {
    cfg.train.stage1 = true;
    cfg.train.stage2 = false;
  } else if (o.stage == "2") {
    cfg.train.stage1 = false;
    cfg.train.stage2 = true;
  } else if (o.stage != "both") {
    throw ConfigError("--stage: expected 1, 2 or both");
  }
  const auto dpath = dataset_path(o, raw);
  const auto ds = load_dataset(dpath);
  std::string split_ref;
  const auto splits = resolve_splits(ds, cfg, &split_ref);
  if (o.fold < 0 || o.fold >= static_cast<int>(splits.folds.size())) throw ConfigError("--fold: out of range");
  const auto& train_ids = splits.folds[static_cast<std::size_t>(o.fold)].train;

  const auto dir = out_dir(o);
  TrainConfig t = cfg.train;
  t.seed = cfg.eval.seed;
  std::optional<ScoringModel> shared;
  if (t.stage1 && t.pretrain_scope == PretrainScope::all_videos) shared = pretrain(ds, ds.ids(), t);
  auto trained = train_two_stage(ds, train_ids, t, shared ? &*shared : nullptr);

  const auto hash = config_hash(cfg);
  RunManifest m;
  m.command = "train";
  m.config = config_to_json(cfg);
  m.config_hash = hash;
  m.dataset_path = dpath;
  m.dataset_checksum = ds.checksum();
  m.splits_reference = split_ref;
  m.seeds = {t.seed};
  const std::string stage_name = t.stage2 ? "stage2" : "stage1";
  const auto ckpt = dir / (stage_name + ".ckpt");
  save_checkpoint(ckpt, Checkpoint{trained.model, std::nullopt, hash, stage_name});
  trained.trace.write_csv(dir / "loss_trace.csv");
  m.artifacts = {{"checkpoint", ckpt.string()}, {"loss_trace", (dir / "loss_trace.csv").string()}};
  finish_manifest(m, timer, dir / "manifest.json");
  out << "fold " << o.fold << ": trained on " << train_ids.size() << " videos, model " << trained.model.hash() << '\n';
  return 0;
}

int cmd_evaluate(const Options& o, std::ostream& out) {
  const WallTimer timer;
  const auto [cfg, raw] = load_effective_config(o);
  const auto dpath = dataset_path(o, raw);
  const auto ds = load_dataset(dpath);
  const auto control = o.control.empty() ? ControlMode::none : parse_control_mode(o.control);
  const auto report = run_experiment(ds, cfg, control);
  const auto dir = out_dir(o);
  report.write(dir / "report.json", dir / "report.csv");

  RunManifest m;
  m.command = "evaluate";
  m.config = config_to_json(cfg);
  m.config_hash = report.config_hash;
  m.dataset_path = dpath;
  m.dataset_checksum = ds.checksum();
  m.splits_reference = report.split_reference;
  m.seeds = report.run_seeds;
  m.artifacts = {{"report_json", (dir / "report.json").string()}, {"report_csv", (dir / "report.csv").string()}};
  finish_manifest(m, timer, dir / "manifest.json");

  const auto tau = report.tau();
  const auto rho = report.rho();
  out << std::fixed << std::setprecision(4) << "tau " << tau.mean << " +- " << tau.stddev << ", rho " << rho.mean
      << " +- " << rho.stddev;
  if (const auto f1 = report.f1()) out << ", F1 " << f1->mean << " +- " << f1->stddev;
  out << '\n';
  return 0;
}

int cmd_summarize(const Options& o, std::ostream& out) {
  if (o.checkpoint.empty()) throw ConfigError("--checkpoint is required");
  if (o.video.empty()) throw ConfigError("--video is required");
  const auto [cfg, raw] = load_effective_config(o);
  const auto ds = load_dataset(dataset_path(o, raw));
  if (!ds.contains(o.video)) throw DataError("unknown video id '" + o.video + "'");
  const auto ckpt = load_checkpoint(o.checkpoint);
  const auto& rec = ds.at(o.video);
  const Eigen::VectorXd p = score_frames(ckpt.model, rec.sequence.features);
  const auto summary = build_summary(p, rec.sequence, rec.annotations, cfg.summary);

  const auto dir = out_dir(o);
  const auto summary_path = dir / (o.video + ".summary.json");
  std::ofstream js(summary_path);
  if (!js) throw DataError("cannot write " + summary_path.string());
  js << summary_to_json(summary).dump(2) << '\n';

  const auto trace_path = dir / (o.video + ".scores.csv");
  std::ofstream cs(trace_path);
  if (!cs) throw DataError("cannot write " + trace_path.string());
  cs << std::setprecision(17) << "index,pick,score,gt_score\n";
  for (Eigen::Index t = 0; t < p.size(); ++t) {
    cs << t << ',' << rec.sequence.picks[static_cast<std::size_t>(t)] << ',' << p(t) << ','
       << rec.annotations.gt_score[static_cast<std::size_t>(t)] << '\n';
  }
  out << o.video << ": " << summary.selected_shots.size() << " of " << summary.segmentation.boundaries.size()
      << " shots, " << summary.used_frames << "/" << summary.budget_frames << " frames\n";
  return 0;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  const auto [cfg, raw] = load_effective_config(o);
  if (o.axis.empty()) throw ConfigError("--axis is required");
  const auto axis = parse_sweep_axis(o.axis);
  if (o.values.empty()) throw ConfigError("--values: empty value list");
  const auto ds = load_dataset(dataset_path(o, raw));
  const auto rows = run_sweep(ds, cfg, axis, o.values);
  const auto path = out_dir(o) / ("sweep_" + to_string(axis) + ".csv");
  std::ofstream cs(path);
  if (!cs) throw DataError("cannot write " + path.string());
  cs << sweep_to_csv(axis, rows);
  out << "wrote " << rows.size() << " rows to " << path.string() << '\n';
  return 0;
}

int cmd_splits_generate(const Options& o, std::ostream& out) {
  if (o.dataset.empty()) throw ConfigError("--dataset is required");
  const auto ds = load_dataset(o.dataset);
  const auto spec = generate_cv_splits(ds.ids(), o.folds, o.seed.value_or(0));
  const auto path = out_dir(o) / "splits.json";
  write_splits(path, spec);
  out << "wrote " << spec.n_folds << " folds to " << path.string() << '\n';
  return 0;
}

int cmd_splits_show(const Options& o, std::ostream& out) {
  if (o.splits.empty()) throw ConfigError("--splits is required");
  const auto spec = read_splits(o.splits);
  const auto& names = tvsum_video_filenames();
  auto label = [&](const std::string& id) {
    if (!o.tvsum_names || id.rfind("video_", 0) != 0) return id;
    const auto k = std::stoul(id.substr(6));
    return k >= 1 && k <= names.size() ? id + " (" + names[k - 1] + ")" : id;
  };
  out << "seed " << spec.seed << ", " << spec.n_folds << " folds, " << spec.all_ids().size() << " videos\n";
  for (std::size_t k = 0; k < spec.folds.size(); ++k) {
    out << "fold " << k << ": " << spec.folds[k].train.size() << " train, " << spec.folds[k].test.size() << " test\n";
    for (const auto& id : spec.folds[k].test) out << "  test " << label(id) << '\n';
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Unsupervised video summarization: training, evaluation and keyshot summaries", "vsum"};
  app.require_subcommand(1);
  Options o;

  auto* pre = app.add_subcommand("precompute", "Compute and cache the per-video information series");
  add_common(pre, o, false);

  auto* train = app.add_subcommand("train", "Train one fold and write checkpoints and a manifest");
  add_common(train, o, true);
  add_run_flags(train, o);
  train->add_option("--stage", o.stage, "1, 2 or both")->capture_default_str();
  train->add_option("--fold", o.fold, "Fold whose training videos are used")->capture_default_str();

  auto* eval = app.add_subcommand("evaluate", "Cross-validated evaluation over all runs");
  add_common(eval, o, true);
  add_run_flags(eval, o);
  eval->add_option("--control", o.control, "random-init or sd-only");

  auto* summ = app.add_subcommand("summarize", "Score one video and build its keyshot summary");
  add_common(summ, o, true);
  summ->add_option("--checkpoint", o.checkpoint, "Model checkpoint");
  summ->add_option("--video", o.video, "Video id");

  auto* sweep = app.add_subcommand("sweep", "Repeat the evaluation across values of one setting");
  add_common(sweep, o, true);
  add_run_flags(sweep, o);
  sweep->add_option("--axis", o.axis, "mask_ratio, nu, w_rep or w_pctrim");
  sweep->add_option("--values", o.values, "Values to evaluate")->delimiter(',');

  auto* splits = app.add_subcommand("splits", "Generate or inspect cross-validation splits");
  splits->require_subcommand(1);
  auto* gen = splits->add_subcommand("generate", "Write a seeded k-fold split file");
  add_common(gen, o, false);
  gen->add_option("--seed", o.seed, "Split seed");
  gen->add_option("--folds", o.folds, "Number of folds")->capture_default_str();
  auto* show = splits->add_subcommand("show", "Print a split file");
  show->add_option("--splits", o.splits, "Split file");
  show->add_flag("--tvsum-names", o.tvsum_names, "Print TVSum filenames next to video_<k> ids");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& ex) {
    err << "vsum: " << ex.what() << '\n';
    return 2;
  }

  try {
    if (pre->parsed()) return cmd_precompute(o, out);
    if (train->parsed()) return cmd_train(o, out);
    if (eval->parsed()) return cmd_evaluate(o, out);
    if (summ->parsed()) return cmd_summarize(o, out);
    if (sweep->parsed()) return cmd_sweep(o, out);
    if (gen->parsed()) return cmd_splits_generate(o, out);
    if (show->parsed()) return cmd_splits_show(o, out);
  } catch (const ConfigError& ex) {
    err << "vsum: config error: " << ex.what() << '\n';
    return 2;
  } catch (const DataError& ex) {
    err << "vsum: data error: " << ex.what() << '\n';
    return 3;
  } catch (const DivergenceError& ex) {
    err << "vsum: training diverged: " << ex.what() << '\n';
    return 4;
  } catch (const std::exception& ex) {
    err << "vsum: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace vsum
