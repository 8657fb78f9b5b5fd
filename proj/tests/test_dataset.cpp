#include "vsum/dataset.hpp"
#include "vsum/errors.hpp"
#include "vsum/synthetic.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>

using namespace vsum;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("vsum_test_" + name);
  fs::remove_all(p);
  return p;
}

Dataset small_dataset(int videos, bool extras) {
  SyntheticSpec spec;
  spec.videos = videos;
  spec.min_frames = 6;
  spec.max_frames = 9;
  spec.dim = 6;
  spec.users = extras ? 3 : 0;
  spec.user_summaries = extras;
  spec.seed = 17;
  return make_synthetic_dataset(spec);
}

void expect_same(const Dataset& a, const Dataset& b) {
  ASSERT_EQ(a.ids(), b.ids());
  for (const auto& id : a.ids()) {
    const auto& x = a.at(id);
    const auto& y = b.at(id);
    EXPECT_EQ(x.sequence.features, y.sequence.features) << id;
    EXPECT_EQ(x.sequence.picks, y.sequence.picks);
    EXPECT_EQ(x.sequence.n_frames, y.sequence.n_frames);
    EXPECT_EQ(x.annotations.gt_score, y.annotations.gt_score);
    EXPECT_EQ(x.annotations.user_scores.has_value(), y.annotations.user_scores.has_value());
    if (x.annotations.user_scores) {
      EXPECT_EQ(*x.annotations.user_scores, *y.annotations.user_scores);
    }
    EXPECT_EQ(x.annotations.user_summaries.has_value(), y.annotations.user_summaries.has_value());
    if (x.annotations.user_summaries) {
      EXPECT_EQ(*x.annotations.user_summaries, *y.annotations.user_summaries);
    }
    EXPECT_EQ(x.metrics, y.metrics);
  }
}

nlohmann::json record_json(int n, int gt_len) {
  nlohmann::json j;
  j["video_id"] = "video_1";
  std::vector<std::vector<float>> f(static_cast<std::size_t>(n), std::vector<float>{0.1f, 0.2f, 0.3f});
  f[1][0] = 1.0f;
  j["features"] = f;
  std::vector<int> picks;
  for (int t = 0; t < n; ++t) picks.push_back(t * 2);
  j["picks"] = picks;
  j["n_frames"] = 2 * n;
  j["gtscore"] = std::vector<float>(static_cast<std::size_t>(gt_len), 0.5f);
  return j;
}

void write_record(const fs::path& dir, const nlohmann::json& j) {
  fs::create_directories(dir);
  std::ofstream(dir / "video_1.json") << j.dump();
}

}  // namespace

TEST(Dataset, TwoVideoContainerLoads) {
  const auto dir = scratch("two_videos");
  write_json_dir(small_dataset(2, false), dir);
  const auto ds = load_dataset(dir);
  EXPECT_EQ(ds.size(), 2u);
  EXPECT_FALSE(ds.checksum().empty());
  fs::remove_all(dir);
}

TEST(Dataset, JsonDirRoundTripIsBitIdentical) {
  const auto ds = small_dataset(5, true);
  const auto dir = scratch("roundtrip_json");
  write_json_dir(ds, dir);
  expect_same(ds, load_dataset(dir, DatasetFormat::json_dir));
  fs::remove_all(dir);
}

TEST(Dataset, Hdf5RoundTripIsBitIdentical) {
  if (!hdf5_available()) GTEST_SKIP() << "built without HDF5";
  const auto ds = small_dataset(5, true);
  const auto file = scratch("roundtrip.h5");
  write_hdf5(ds, file);
  expect_same(ds, load_dataset(file, DatasetFormat::hdf5));
  fs::remove(file);
}

TEST(Dataset, ChecksumTracksBytes) {
  const auto a = scratch("checksum_a");
  const auto b = scratch("checksum_b");
  write_json_dir(small_dataset(3, false), a);
  write_json_dir(small_dataset(3, false), b);
  EXPECT_EQ(load_dataset(a).checksum(), load_dataset(b).checksum());
  std::ofstream(b / "video_1.json", std::ios::app) << " ";
  EXPECT_NE(load_dataset(a).checksum(), load_dataset(b).checksum());
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Dataset, ShortGtScoreIsValidationError) {
  const auto dir = scratch("short_gt");
  write_record(dir, record_json(5, 4));
  try {
    load_dataset(dir);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("video_1"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("gtscore"), std::string::npos);
  }
  fs::remove_all(dir);
}

TEST(Dataset, MissingFieldIsLoadErrorNamingVideoAndField) {
  const auto dir = scratch("missing_field");
  auto j = record_json(5, 5);
  j.erase("picks");
  write_record(dir, j);
  try {
    load_dataset(dir);
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("video_1"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("picks"), std::string::npos);
  }
  fs::remove_all(dir);
}

TEST(Dataset, MissingChangePointsIsAccepted) {
  const auto dir = scratch("no_cps");
  write_record(dir, record_json(5, 5));
  const auto ds = load_dataset(dir);
  EXPECT_FALSE(ds.at("video_1").annotations.change_points.has_value());
  fs::remove_all(dir);
}

TEST(Dataset, BrokenChangePointsAreRejected) {
  const auto dir = scratch("bad_cps");
  auto j = record_json(5, 5);
  j["change_points"] = {{0, 3}, {5, 9}};
  write_record(dir, j);
  EXPECT_THROW(load_dataset(dir), ValidationError);
  fs::remove_all(dir);
}

TEST(Dataset, MissingPathIsLoadError) { EXPECT_THROW(load_dataset("/nonexistent/vsum"), LoadError); }

TEST(Dataset, IdsSortNumerically) {
  const auto ds = small_dataset(12, false);
  const auto ids = ds.ids();
  EXPECT_EQ(ids[1], "video_2");
  EXPECT_EQ(ids.back(), "video_12");
}

TEST(Dataset, FormatNames) {
  EXPECT_EQ(parse_dataset_format("h5"), DatasetFormat::hdf5);
  EXPECT_EQ(parse_dataset_format("json-dir"), DatasetFormat::json_dir);
  EXPECT_THROW(parse_dataset_format("csv"), ConfigError);
}
