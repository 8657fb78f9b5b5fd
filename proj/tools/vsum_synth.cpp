// Writes a synthetic dataset for smoke tests and demos.

#include "vsum/dataset.hpp"
#include "vsum/synthetic.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic feature dataset", "vsum_synth"};
  vsum::SyntheticSpec spec;
  std::string out;
  std::string format = "json-dir";
  std::string truth = "ptri";
  app.add_option("--out", out, "Output directory (json-dir) or file (h5)")->required();
  app.add_option("--format", format, "json-dir or h5")->capture_default_str();
  app.add_option("--videos", spec.videos)->capture_default_str();
  app.add_option("--min-frames", spec.min_frames)->capture_default_str();
  app.add_option("--max-frames", spec.max_frames)->capture_default_str();
  app.add_option("--dim", spec.dim, "Even feature dimension")->capture_default_str();
  app.add_option("--users", spec.users, "Annotator score rows")->capture_default_str();
  app.add_flag("--user-summaries", spec.user_summaries, "Add random keyshot selections");
  app.add_option("--truth", truth, "ptri or random")->capture_default_str();
  app.add_option("--seed", spec.seed)->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    if (truth == "ptri") {
      spec.truth = vsum::SyntheticTruth::ptri;
    } else if (truth == "random") {
      spec.truth = vsum::SyntheticTruth::random;
    } else {
      std::cerr << "vsum_synth: --truth must be ptri or random\n";
      return 2;
    }
    const auto ds = vsum::make_synthetic_dataset(spec);
    vsum::write_dataset(ds, out, vsum::parse_dataset_format(format));
    std::cout << "wrote " << ds.size() << " videos to " << out << '\n';
  } catch (const std::exception& ex) {
    std::cerr << "vsum_synth: " << ex.what() << '\n';
    return 3;
  }
  return 0;
}
