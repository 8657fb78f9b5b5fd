#include "vsum/splits.hpp"

#include "vsum/dataset.hpp"
#include "vsum/errors.hpp"
#include "vsum/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace vsum {

using nlohmann::json;

std::vector<std::string> SplitSpec::all_ids() const {
  std::vector<std::string> ids;
  for (const auto& f : folds) ids.insert(ids.end(), f.test.begin(), f.test.end());
  std::sort(ids.begin(), ids.end(), VideoIdLess{});
  return ids;
}

SplitSpec generate_cv_splits(const std::vector<std::string>& video_ids, int n_folds, std::uint64_t seed) {
  if (n_folds < 2) throw ConfigError("n_folds must be at least 2");
  if (static_cast<std::size_t>(n_folds) > video_ids.size()) {
    throw ConfigError("n_folds (" + std::to_string(n_folds) + ") exceeds the number of videos (" +
                      std::to_string(video_ids.size()) + ")");
  }
  std::vector<std::string> ids = video_ids;
  std::sort(ids.begin(), ids.end(), VideoIdLess{});
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw ConfigError("duplicate video ids");

  std::vector<std::string> order = ids;
  Rng rng(derive_seed(seed, "splits"));
  shuffle(order, rng);

  SplitSpec spec;
  spec.seed = seed;
  spec.n_folds = n_folds;
  spec.folds.resize(static_cast<std::size_t>(n_folds));
  for (std::size_t i = 0; i < order.size(); ++i) spec.folds[i % spec.folds.size()].test.push_back(order[i]);
  for (auto& fold : spec.folds) {
    std::sort(fold.test.begin(), fold.test.end(), VideoIdLess{});
    const std::set<std::string> test(fold.test.begin(), fold.test.end());
    for (const auto& id : ids) {
      if (!test.count(id)) fold.train.push_back(id);
    }
  }
  return spec;
}

void validate_splits(const SplitSpec& spec) {
  if (spec.n_folds < 2) throw ValidationError("split spec: n_folds must be at least 2");
  if (static_cast<int>(spec.folds.size()) != spec.n_folds) {
    throw ValidationError("split spec: n_folds is " + std::to_string(spec.n_folds) + " but " +
                          std::to_string(spec.folds.size()) + " folds are listed");
  }
  std::set<std::string> universe;
  for (const auto& f : spec.folds) {
    universe.insert(f.train.begin(), f.train.end());
    universe.insert(f.test.begin(), f.test.end());
  }
  std::set<std::string> tested;
  for (std::size_t k = 0; k < spec.folds.size(); ++k) {
    const auto& f = spec.folds[k];
    const std::set<std::string> train(f.train.begin(), f.train.end());
    const std::set<std::string> test(f.test.begin(), f.test.end());
    const auto where = "split spec fold " + std::to_string(k) + ": ";
    if (train.size() != f.train.size() || test.size() != f.test.size()) throw ValidationError(where + "duplicate video id");
    if (test.empty()) throw ValidationError(where + "empty test set");
    for (const auto& id : test) {
      if (train.count(id)) throw ValidationError(where + "video '" + id + "' is in both train and test");
      if (!tested.insert(id).second) throw ValidationError(where + "video '" + id + "' is tested in more than one fold");
    }
    if (train.size() + test.size() != universe.size()) throw ValidationError(where + "train and test do not cover all videos");
  }
  if (tested.size() != universe.size()) throw ValidationError("split spec: some videos are never tested");
}

std::string serialize_splits(const SplitSpec& spec) {
  std::ostringstream os;
  os << "{\n  \"seed\": " << spec.seed << ",\n  \"n_folds\": " << spec.n_folds << ",\n  \"folds\": [\n";
  for (std::size_t k = 0; k < spec.folds.size(); ++k) {
    const json fold = {{"train", spec.folds[k].train}, {"test", spec.folds[k].test}};
    os << "    " << fold.dump() << (k + 1 < spec.folds.size() ? ",\n" : "\n");
  }
  os << "  ]\n}\n";
  return os.str();
}

namespace {

int line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Line where fold k starts, found via the k-th `"train"` or `"test"` key.
int line_of_fold(const std::string& text, std::size_t k) {
  std::size_t pos = 0;
  std::size_t seen = 0;
  while ((pos = text.find('{', pos + 1)) != std::string::npos) {
    const auto close = text.find('}', pos);
    const auto body = text.substr(pos, close == std::string::npos ? std::string::npos : close - pos);
    if (body.find("\"test\"") != std::string::npos || body.find("\"train\"") != std::string::npos) {
      if (seen++ == k) return line_of_offset(text, pos);
    }
  }
  return 0;
}

}  // namespace

SplitSpec parse_splits(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& ex) {
    throw ParseError(std::string("malformed split file: ") + ex.what(), line_of_offset(text, ex.byte > 0 ? ex.byte - 1 : 0));
  }
  SplitSpec spec;
  try {
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.n_folds = j.at("n_folds").get<int>();
    const auto& folds = j.at("folds");
    for (std::size_t k = 0; k < folds.size(); ++k) {
      Fold f;
      f.train = folds[k].at("train").get<std::vector<std::string>>();
      f.test = folds[k].at("test").get<std::vector<std::string>>();
      spec.folds.push_back(std::move(f));
    }
  } catch (const json::exception& ex) {
    throw ParseError(std::string("split file: ") + ex.what(), 1);
  }
  try {
    validate_splits(spec);
  } catch (const ValidationError& ex) {
    // Attribute fold-level violations to the fold's line.
    const std::string msg = ex.what();
    int line = 1;
    const std::string key = "fold ";
    if (const auto at = msg.find(key); at != std::string::npos) {
      const auto k = static_cast<std::size_t>(std::stoul(msg.substr(at + key.size())));
      line = std::max(1, line_of_fold(text, k));
    }
    throw ParseError(msg, line);
  }
  return spec;
}

SplitSpec read_splits(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open split file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_splits(ss.str());
}

void write_splits(const std::filesystem::path& path, const SplitSpec& spec) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write split file " + path.string());
  out << serialize_splits(spec);
}

const std::vector<std::string>& tvsum_video_filenames() {
  static const std::vector<std::string> names = {
      "AwmHb44_ouw.mp4", "98MoyGZKHXc.mp4", "J0nA4VgnoCo.mp4", "gzDbaEs1Rlg.mp4", "XzYM3PfTM4w.mp4",
      "HT5vyqe0Xaw.mp4", "sTEELN-vY30.mp4", "vdmoEJ5YbrQ.mp4", "xwqBXPGE9pQ.mp4", "akI8YFjEmUw.mp4",
      "i3wAGJaaktw.mp4", "Bhxk-O1Y7Ho.mp4", "0tmA_C6XwfM.mp4", "3eYKfiOEJNs.mp4", "xxdtq8mxegs.mp4",
      "WG0MBPpPC6I.mp4", "Hl-__g2gn_A.mp4", "Yi4Ij2NM7U4.mp4", "37rzWOQsNIw.mp4", "LRw_obCPUt0.mp4",
      "cjibtmSLxQ4.mp4", "b626MiF1ew4.mp4", "XkqCExn6_Us.mp4", "GsAD1KT1xo8.mp4", "PJrm840pAUI.mp4",
      "91IHQYk1IQM.mp4", "RBCABdttQmI.mp4", "z_6gVvQb2d0.mp4", "fWutDQy1nnY.mp4", "4wU_LUjG5Ic.mp4",
      "VuWGsYPqAX8.mp4", "JKpqYvAdIsw.mp4", "xmEERLqJ2kU.mp4", "byxOvuiIJV0.mp4", "_xMr-HKMfVA.mp4",
      "WxtbjNsCQ8A.mp4", "uGu_10sucQo.mp4", "EE-bNr36nyA.mp4", "Se3oxnaPsz0.mp4", "oDXZc0tZe04.mp4",
      "qqR6AEXwxoQ.mp4", "EYqVtI9YWJA.mp4", "eQu1rNs0an0.mp4", "JgHubY5Vw3Y.mp4", "iVt07TCkFM0.mp4",
      "E11zDS9XGzg.mp4", "NyBmCxDoHJU.mp4", "kLxoNp-UchI.mp4", "jcoYJXDG9sw.mp4", "-esJrBWj2d8.mp4",
  };
  return names;
}

}  // namespace vsum
