#include "vsum/experiment.hpp"

#include "vsum/errors.hpp"
#include "vsum/evaluation.hpp"
#include "vsum/summarize.hpp"
#include "vsum/training.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

namespace vsum {

using nlohmann::json;

ControlMode parse_control_mode(const std::string& s) {
  if (s == "none") return ControlMode::none;
  if (s == "random-init" || s == "random_init") return ControlMode::random_init;
  if (s == "sd-only" || s == "sd_only") return ControlMode::sd_only;
  throw ConfigError("control: expected 'random-init' or 'sd-only', got '" + s + "'");
}

std::string to_string(ControlMode m) {
  switch (m) {
    case ControlMode::none: return "none";
    case ControlMode::random_init: return "random-init";
    case ControlMode::sd_only: return "sd-only";
  }
  return "none";
}

Stat summarize_values(const std::vector<double>& v) {
  Stat s;
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

namespace {

template <typename Get>
std::vector<double> per_run_means(const EvalReport& r, Get get) {
  std::vector<double> sum(static_cast<std::size_t>(r.runs), 0.0);
  std::vector<int> count(static_cast<std::size_t>(r.runs), 0);
  for (const auto& row : r.rows) {
    const auto v = get(row);
    if (!v) continue;
    sum[static_cast<std::size_t>(row.run)] += *v;
    count[static_cast<std::size_t>(row.run)] += 1;
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < sum.size(); ++i) {
    if (count[i] > 0) out.push_back(sum[i] / count[i]);
  }
  return out;
}

json stat_json(const Stat& s) { return json{{"mean", s.mean}, {"std", s.stddev}}; }

// Runs fn(i) for i in [0, n) on up to `jobs` threads. The first failure by
// index is rethrown after all workers stop.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn fn) {
  std::vector<std::exception_ptr> errors(n);
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (std::size_t i; !failed && (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::thread> pool;
  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Prefixes the message while keeping the exit-code class.
[[noreturn]] void rethrow_with(const std::string& ctx) {
  try {
    throw;
  } catch (const DivergenceError& ex) {
    throw DivergenceError(ctx + ": " + ex.what());
  } catch (const ConfigError& ex) {
    throw ConfigError(ctx + ": " + ex.what());
  } catch (const DataError& ex) {
    throw DataError(ctx + ": " + ex.what());
  } catch (const std::exception& ex) {
    throw std::runtime_error(ctx + ": " + ex.what());
  }
}

std::vector<std::string> all_ids_sorted(const Dataset& d) { return d.ids(); }

}  // namespace

std::vector<double> EvalReport::run_means_tau() const {
  return per_run_means(*this, [](const EvalRow& r) { return std::optional<double>(r.tau); });
}
std::vector<double> EvalReport::run_means_rho() const {
  return per_run_means(*this, [](const EvalRow& r) { return std::optional<double>(r.rho); });
}
std::vector<double> EvalReport::run_means_f1() const {
  return per_run_means(*this, [](const EvalRow& r) { return r.f1; });
}
Stat EvalReport::tau() const { return summarize_values(run_means_tau()); }
Stat EvalReport::rho() const { return summarize_values(run_means_rho()); }
std::optional<Stat> EvalReport::f1() const {
  const auto m = run_means_f1();
  if (m.empty()) return std::nullopt;
  return summarize_values(m);
}

json EvalReport::to_json() const {
  json rows_j = json::array();
  for (const auto& r : rows) {
    json row = {{"run", r.run}, {"fold", r.fold}, {"video_id", r.video_id}, {"tau", r.tau}, {"rho", r.rho}};
    row["f1"] = r.f1 ? json(*r.f1) : json(nullptr);
    rows_j.push_back(std::move(row));
  }
  json per_run = json::array();
  const auto mt = run_means_tau();
  const auto mr = run_means_rho();
  const auto mf = run_means_f1();
  for (std::size_t i = 0; i < mt.size(); ++i) {
    json pr = {{"run", i}, {"seed", i < run_seeds.size() ? run_seeds[i] : 0}, {"tau", mt[i]}, {"rho", mr[i]}};
    if (i < mf.size()) pr["f1"] = mf[i];
    per_run.push_back(std::move(pr));
  }
  json models_j = json::array();
  for (const auto& m : models) {
    models_j.push_back({{"run", m.run},
                        {"fold", m.fold},
                        {"init_hash", m.init_hash},
                        {"stage2_init_hash", m.stage2_init_hash},
                        {"final_hash", m.final_hash}});
  }
  json agg = {{"tau", stat_json(tau())}, {"rho", stat_json(rho())}};
  if (const auto f = f1()) agg["f1"] = stat_json(*f);
  return json{{"config_hash", config_hash},
              {"split_reference", split_reference},
              {"control", control},
              {"runs", runs},
              {"n_folds", n_folds},
              {"run_seeds", run_seeds},
              {"aggregate", agg},
              {"per_run", per_run},
              {"models", models_j},
              {"rows", rows_j}};
}

std::string EvalReport::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(17) << "run,fold,video_id,tau,rho,f1\n";
  for (const auto& r : rows) {
    os << r.run << ',' << r.fold << ',' << r.video_id << ',' << r.tau << ',' << r.rho << ',';
    if (r.f1) os << *r.f1;
    os << '\n';
  }
  return os.str();
}

void EvalReport::write(const std::filesystem::path& json_path, const std::filesystem::path& csv_path) const {
  std::ofstream js(json_path);
  if (!js) throw DataError("cannot write report " + json_path.string());
  js << to_json().dump(2) << '\n';
  std::ofstream cs(csv_path);
  if (!cs) throw DataError("cannot write report " + csv_path.string());
  cs << to_csv();
}

SplitSpec resolve_splits(const Dataset& dataset, const ExperimentConfig& cfg, std::string* reference) {
  if (!cfg.eval.splits_path.empty()) {
    auto spec = read_splits(cfg.eval.splits_path);
    for (const auto& id : spec.all_ids()) {
      if (!dataset.contains(id)) throw ValidationError("split file names unknown video '" + id + "'");
    }
    if (spec.all_ids().size() != dataset.size()) throw ValidationError("split file does not cover every dataset video");
    if (reference) *reference = cfg.eval.splits_path + "#" + to_hex(fnv1a64(serialize_splits(spec)));
    return spec;
  }
  auto spec = generate_cv_splits(all_ids_sorted(dataset), cfg.eval.n_folds, cfg.eval.effective_split_seed());
  if (reference) {
    *reference = "generated:seed=" + std::to_string(cfg.eval.effective_split_seed()) + "#" +
                 to_hex(fnv1a64(serialize_splits(spec)));
  }
  return spec;
}

EvalReport run_experiment(const Dataset& dataset, const ExperimentConfig& cfg_in, ControlMode control) {
  ExperimentConfig cfg = cfg_in;
  if (control == ControlMode::sd_only) {
    cfg.train.weights.w_ptrim = 0.0;
    cfg.train.weights.w_rep = 0.0;
    cfg.train.weights.w_pctrim = 0.0;
    cfg.train.stage1 = false;
    cfg.train.stage2 = true;
  }
  validate(cfg);

  EvalReport report;
  report.config_hash = config_hash(cfg);
  report.control = to_string(control);
  const auto splits = resolve_splits(dataset, cfg, &report.split_reference);
  report.runs = cfg.eval.runs;
  report.n_folds = static_cast<int>(splits.folds.size());
  for (int r = 0; r < cfg.eval.runs; ++r) report.run_seeds.push_back(cfg.eval.seed + static_cast<std::uint64_t>(r));

  const auto n_runs = static_cast<std::size_t>(cfg.eval.runs);
  const auto n_folds = splits.folds.size();
  auto run_cfg = [&](std::size_t r) {
    TrainConfig t = cfg.train;
    t.seed = report.run_seeds[r];
    return t;
  };

  // One shared pretrained checkpoint per run when pretraining sees every video.
  std::vector<std::optional<ScoringModel>> shared(n_runs);
  const bool share = control == ControlMode::none && cfg.train.stage1 && cfg.train.stage1_epochs > 0 &&
                     cfg.train.pretrain_scope == PretrainScope::all_videos;
  if (share) {
    parallel_for(n_runs, cfg.eval.jobs, [&](std::size_t r) {
      try {
        const auto t = run_cfg(r);
        shared[r] = pretrain(dataset, dataset.ids(), t);
      } catch (...) {
        rethrow_with("run " + std::to_string(r) + ", pretraining");
      }
    });
  }

  std::vector<std::vector<EvalRow>> slots(n_runs * n_folds);
  std::vector<FoldModelInfo> infos(n_runs * n_folds);
  parallel_for(n_runs * n_folds, cfg.eval.jobs, [&](std::size_t task) {
    const std::size_t r = task / n_folds;
    const std::size_t k = task % n_folds;
    try {
      const auto t = run_cfg(r);
      const auto& fold = splits.folds[k];
      FoldModelInfo info{static_cast<int>(r), static_cast<int>(k), {}, {}, {}};
      ScoringModel model;
      if (control == ControlMode::random_init) {
        model = initial_model(dataset, t);
        info.init_hash = info.stage2_init_hash = model.hash();
      } else {
        auto trained = train_two_stage(dataset, fold.train, t, shared[r] ? &*shared[r] : nullptr);
        info.init_hash = trained.init_hash;
        info.stage2_init_hash = trained.stage2_init_hash;
        model = std::move(trained.model);
      }
      info.final_hash = model.hash();
      auto& rows = slots[task];
      for (const auto& id : fold.test) {
        const auto& rec = dataset.at(id);
        const Eigen::VectorXd p = score_frames(model, rec.sequence.features);
        const auto pc = correlation_protocol(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())),
                                             rec.annotations, cfg.eval.correlation_target);
        EvalRow row{static_cast<int>(r), static_cast<int>(k), id, pc.tau, pc.rho, std::nullopt};
        if (cfg.eval.compute_f1 && rec.annotations.user_summaries && rec.annotations.user_summaries->rows() > 0) {
          const auto summary = build_summary(p, rec.sequence, rec.annotations, cfg.summary);
          row.f1 = f1_keyshot(summary.keyshot_vector, *rec.annotations.user_summaries, cfg.eval.f1_mode);
        }
        rows.push_back(std::move(row));
      }
      infos[task] = std::move(info);
    } catch (...) {
      rethrow_with("run " + std::to_string(r) + ", fold " + std::to_string(k));
    }
  });

  for (std::size_t i = 0; i < slots.size(); ++i) {
    report.rows.insert(report.rows.end(), slots[i].begin(), slots[i].end());
    report.models.push_back(infos[i]);
  }
  return report;
}

ControlReports random_controls(const Dataset& dataset, const ExperimentConfig& cfg) {
  return {run_experiment(dataset, cfg, ControlMode::random_init), run_experiment(dataset, cfg, ControlMode::sd_only)};
}

SweepAxis parse_sweep_axis(const std::string& s) {
  if (s == "mask_ratio") return SweepAxis::mask_ratio;
  if (s == "nu") return SweepAxis::nu;
  if (s == "w_rep") return SweepAxis::w_rep;
  if (s == "w_pctrim") return SweepAxis::w_pctrim;
  throw ConfigError("sweep axis: expected mask_ratio, nu, w_rep or w_pctrim, got '" + s + "'");
}

std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::mask_ratio: return "mask_ratio";
    case SweepAxis::nu: return "nu";
    case SweepAxis::w_rep: return "w_rep";
    case SweepAxis::w_pctrim: return "w_pctrim";
  }
  return "nu";
}

ExperimentConfig apply_sweep_value(ExperimentConfig cfg, SweepAxis axis, double v) {
  switch (axis) {
    case SweepAxis::mask_ratio:
      cfg.train.mask_lo = cfg.train.mask_hi = v;
      break;
    case SweepAxis::nu: cfg.train.weights.nu = v; break;
    case SweepAxis::w_rep: cfg.train.weights.w_rep = v; break;
    case SweepAxis::w_pctrim: cfg.train.weights.w_pctrim = v; break;
  }
  validate(cfg);
  return cfg;
}

std::vector<SweepRow> run_sweep(const Dataset& dataset, const ExperimentConfig& cfg, SweepAxis axis,
                                const std::vector<double>& values) {
  if (values.empty()) throw ConfigError("sweep: empty value list");
  std::vector<SweepRow> out;
  for (double v : values) {
    const auto report = run_experiment(dataset, apply_sweep_value(cfg, axis, v));
    out.push_back({v, report.tau(), report.rho()});
  }
  return out;
}

std::string sweep_to_csv(SweepAxis axis, const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << std::setprecision(17) << to_string(axis) << ",tau_mean,tau_std,rho_mean,rho_std\n";
  for (const auto& r : rows) {
    os << r.value << ',' << r.tau.mean << ',' << r.tau.stddev << ',' << r.rho.mean << ',' << r.rho.stddev << '\n';
  }
  return os.str();
}

}  // namespace vsum
