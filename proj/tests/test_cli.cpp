#include "cli.hpp"

#include "vsum/dataset.hpp"
#include "vsum/infometrics.hpp"
#include "vsum/manifest.hpp"
#include "vsum/summarize.hpp"
#include "vsum/synthetic.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace vsum;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("vsum_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
    SyntheticSpec spec;
    spec.videos = 6;
    spec.min_frames = 10;
    spec.max_frames = 14;
    spec.dim = 8;
    spec.users = 2;
    spec.user_summaries = true;
    spec.seed = 3;
    write_json_dir(make_synthetic_dataset(spec), root_ / "data");
    write_config(R"({"dataset_profile": "custom", "runs": 2, "n_folds": 3, "stage1_epochs": 1,
                    "stage2_epochs": 2, "lr": 1e-4})");
  }
  void TearDown() override { fs::remove_all(root_); }

  void write_config(const std::string& text) { std::ofstream(root_ / "config.json") << text; }

  int run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return run_cli(args, out_, err_);
  }

  std::string path(const std::string& rel) const { return (root_ / rel).string(); }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path root_;
  std::ostringstream out_, err_;
};

}  // namespace

TEST_F(CliTest, PrecomputeWritesMatchingCacheIdempotently) {
  ASSERT_EQ(run({"precompute", "--dataset", path("data"), "--out", path("pre")}), 0) << err_.str();
  const auto first = slurp(root_ / "pre" / "metrics.json");
  ASSERT_EQ(run({"precompute", "--dataset", path("data"), "--out", path("pre")}), 0);
  EXPECT_EQ(slurp(root_ / "pre" / "metrics.json"), first);
  const auto ds = load_dataset(path("data"));
  for (const auto& e : read_metrics_cache(root_ / "pre" / "metrics.json")) {
    EXPECT_EQ(e.metrics.ptri, ptri_series(ds.at(e.video_id).sequence.features));
  }
}

TEST_F(CliTest, TrainStageTwoOnlyWritesCheckpointTraceAndManifest) {
  ASSERT_EQ(run({"train", "--config", path("config.json"), "--dataset", path("data"), "--out", path("train"), "--stage", "2"}),
            0)
      << err_.str();
  EXPECT_TRUE(fs::exists(root_ / "train" / "stage2.ckpt"));
  const auto trace = slurp(root_ / "train" / "loss_trace.csv");
  EXPECT_EQ(trace.find("\n1,"), std::string::npos);  // no stage-1 rows
  const auto m = RunManifest::read(root_ / "train" / "manifest.json");
  EXPECT_EQ(m.command, "train");
  EXPECT_FALSE(m.config.at("stage1").get<bool>());
  EXPECT_GT(m.wall_seconds, 0.0);
  EXPECT_GT(m.peak_rss_kb, 0);
  EXPECT_FALSE(m.dataset_checksum.empty());
}

TEST_F(CliTest, ManifestReproducesTraining) {
  ASSERT_EQ(run({"train", "--config", path("config.json"), "--dataset", path("data"), "--out", path("a")}), 0);
  ASSERT_EQ(run({"train", "--config", path("a/manifest.json"), "--out", path("b")}), 0) << err_.str();
  EXPECT_EQ(slurp(root_ / "a" / "stage2.ckpt"), slurp(root_ / "b" / "stage2.ckpt"));
  EXPECT_EQ(slurp(root_ / "a" / "loss_trace.csv"), slurp(root_ / "b" / "loss_trace.csv"));
}

TEST_F(CliTest, EvaluateWritesConsistentReports) {
  ASSERT_EQ(run({"evaluate", "--config", path("config.json"), "--dataset", path("data"), "--out", path("ev")}), 0)
      << err_.str();
  const auto report = json::parse(slurp(root_ / "ev" / "report.json"));
  std::istringstream csv(slurp(root_ / "ev" / "report.csv"));
  std::string line;
  std::getline(csv, line);
  int rows = 0;
  double sum = 0;
  while (std::getline(csv, line)) {
    std::stringstream ss(line);
    std::string cell;
    for (int c = 0; c < 4; ++c) std::getline(ss, cell, ',');
    sum += std::stod(cell);
    ++rows;
  }
  EXPECT_EQ(rows, 2 * 6);
  EXPECT_NEAR(report.at("aggregate").at("tau").at("mean").get<double>(), sum / rows, 1e-12);
  const auto m = RunManifest::read(root_ / "ev" / "manifest.json");
  EXPECT_EQ(m.seeds, (std::vector<std::uint64_t>{0, 1}));

  ASSERT_EQ(run({"evaluate", "--config", path("ev/manifest.json"), "--dataset", path("data"), "--out", path("ev2")}), 0);
  EXPECT_EQ(slurp(root_ / "ev" / "report.json"), slurp(root_ / "ev2" / "report.json"));
}

TEST_F(CliTest, EvaluateControlAndJobs) {
  ASSERT_EQ(run({"evaluate", "--config", path("config.json"), "--dataset", path("data"), "--out", path("c1"), "--control",
                 "random-init"}),
            0);
  ASSERT_EQ(run({"evaluate", "--config", path("config.json"), "--dataset", path("data"), "--out", path("c2"), "--control",
                 "random-init", "--jobs", "2"}),
            0);
  const auto report = json::parse(slurp(root_ / "c1" / "report.json"));
  EXPECT_EQ(report.at("control"), "random-init");
  EXPECT_EQ(slurp(root_ / "c1" / "report.json"), slurp(root_ / "c2" / "report.json"));
}

TEST_F(CliTest, SummarizeRespectsBudgetAndIsRepeatable) {
  ASSERT_EQ(run({"train", "--config", path("config.json"), "--dataset", path("data"), "--out", path("t")}), 0);
  const std::vector<std::string> args{"summarize", "--config",  path("config.json"), "--dataset", path("data"),
                                      "--checkpoint", path("t/stage2.ckpt"), "--video", "video_2", "--out", path("s")};
  ASSERT_EQ(run(args), 0) << err_.str();
  const auto first = slurp(root_ / "s" / "video_2.summary.json");
  ASSERT_EQ(run(args), 0);
  EXPECT_EQ(slurp(root_ / "s" / "video_2.summary.json"), first);

  const auto j = json::parse(first);
  const auto keyshots = decode_rle(j.at("keyshot_vector"));
  const auto n_frames = load_dataset(path("data")).at("video_2").sequence.n_frames;
  ASSERT_EQ(static_cast<std::int64_t>(keyshots.size()), n_frames);
  std::int64_t ones = 0;
  for (auto v : keyshots) ones += v;
  EXPECT_LE(ones, n_frames * 15 / 100);

  std::istringstream csv(slurp(root_ / "s" / "video_2.scores.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "index,pick,score,gt_score");
  while (std::getline(csv, line)) {
    std::stringstream ss(line);
    std::string cell;
    for (int c = 0; c < 3; ++c) std::getline(ss, cell, ',');
    const double p = std::stod(cell);
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
  }
}

TEST_F(CliTest, SweepWritesOneRowPerValue) {
  ASSERT_EQ(run({"sweep", "--config", path("config.json"), "--dataset", path("data"), "--out", path("sw"), "--axis",
                 "mask_ratio", "--values", "0.15,0.3,0.5"}),
            0)
      << err_.str();
  std::istringstream csv(slurp(root_ / "sw" / "sweep_mask_ratio.csv"));
  std::string line;
  int rows = -1;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 3);
}

TEST_F(CliTest, SplitsGenerateAndShow) {
  ASSERT_EQ(run({"splits", "generate", "--dataset", path("data"), "--folds", "3", "--seed", "4", "--out", path("sp")}), 0);
  ASSERT_EQ(run({"splits", "show", "--splits", path("sp/splits.json"), "--tvsum-names"}), 0);
  EXPECT_NE(out_.str().find("3 folds, 6 videos"), std::string::npos) << out_.str();
  EXPECT_NE(out_.str().find("video_1 ("), std::string::npos);
}

TEST_F(CliTest, ExitCodes) {
  write_config(R"({"learning_rate": 0.1})");
  EXPECT_EQ(run({"evaluate", "--config", path("config.json"), "--dataset", path("data"), "--out", path("x")}), 2);
  EXPECT_NE(err_.str().find("learning_rate"), std::string::npos);
  EXPECT_EQ(run({"evaluate", "--bogus"}), 2);
  EXPECT_EQ(run({"train", "--dataset", path("data"), "--stage", "3", "--out", path("x")}), 2);

  write_config(R"({"runs": 1, "n_folds": 2, "stage2_epochs": 1})");
  EXPECT_EQ(run({"evaluate", "--config", path("config.json"), "--dataset", path("missing"), "--out", path("x")}), 3);
  EXPECT_EQ(run({"splits", "show", "--splits", path("config.json")}), 3);

  write_config(R"({"runs": 1, "n_folds": 2, "stage1": false, "stage2_epochs": 3, "lr": 1e300})");
  EXPECT_EQ(run({"evaluate", "--config", path("config.json"), "--dataset", path("data"), "--out", path("x")}), 4);
  EXPECT_NE(err_.str().find("epoch"), std::string::npos) << err_.str();
}
