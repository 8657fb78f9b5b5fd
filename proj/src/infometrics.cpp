#include "vsum/infometrics.hpp"

#include "vsum/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace vsum {

std::string to_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::vector<double> feature_softmax(std::span<const double> x) {
  if (x.size() < 2) throw std::invalid_argument("feature_softmax: need at least 2 dimensions");
  double mx = -INFINITY;
  for (double v : x) {
    if (!std::isfinite(v)) throw std::invalid_argument("feature_softmax: non-finite feature value");
    mx = std::max(mx, v);
  }
  std::vector<double> out(x.size());
  double sum = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    out[j] = std::exp(x[j] - mx);
    sum += out[j];
  }
  for (double& v : out) v /= sum;
  return out;
}

double entropy(std::span<const double> dist) {
  double h = 0.0;
  for (double p : dist) {
    if (p < 0.0 || !std::isfinite(p)) throw std::invalid_argument("entropy: probabilities must be finite and non-negative");
    if (p > 0.0) h -= p * std::log(p);
  }
  return std::max(h, 0.0);
}

std::vector<double> entropy_series(const FeatureMatrix& features) {
  const auto n = static_cast<std::size_t>(features.rows());
  const auto d = static_cast<std::size_t>(features.cols());
  std::vector<double> h(n);
  for (std::size_t t = 0; t < n; ++t) {
    const std::span<const double> row(features.row(static_cast<Eigen::Index>(t)).data(), d);
    h[t] = entropy(feature_softmax(row));
  }
  return h;
}

std::vector<double> ptri_from_entropy(std::span<const double> h) {
  if (h.size() < 2) throw std::invalid_argument("ptri: need at least 2 frames");
  std::vector<double> out(h.size() - 1);
  for (std::size_t t = 1; t < h.size(); ++t) {
    out[t - 1] = std::abs((h[t] - h[t - 1]) / std::max(h[t], kEntropyFloor));
  }
  return out;
}

std::vector<double> pctri_from_entropy(std::span<const double> h) {
  if (h.size() < 2) throw std::invalid_argument("pctri: need at least 2 frames");
  std::vector<double> out(h.size() - 1);
  double prefix = h[0];
  for (std::size_t t = 1; t < h.size(); ++t) {
    const double history_mean = prefix / static_cast<double>(t);
    out[t - 1] = std::abs((h[t] - history_mean) / std::max(h[t], kEntropyFloor));
    prefix += h[t];
  }
  return out;
}

std::vector<double> ptri_series(const FeatureMatrix& features) { return ptri_from_entropy(entropy_series(features)); }

std::vector<double> pctri_series(const FeatureMatrix& features) { return pctri_from_entropy(entropy_series(features)); }

InfoMetrics compute_info_metrics(const FeatureMatrix& features) {
  InfoMetrics m;
  m.entropy = entropy_series(features);
  m.ptri = ptri_from_entropy(m.entropy);
  m.pctri = pctri_from_entropy(m.entropy);
  return m;
}

void write_metrics_cache(const std::filesystem::path& path, const std::vector<MetricsCacheEntry>& entries) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : entries) {
    arr.push_back({{"video_id", e.video_id},
                   {"H", e.metrics.entropy},
                   {"delta", e.metrics.ptri},
                   {"gamma", e.metrics.pctri}});
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write metrics cache " + path.string());
  out << arr.dump() << '\n';
  if (!out) throw DataError("write failed for metrics cache " + path.string());
}

std::vector<MetricsCacheEntry> read_metrics_cache(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open metrics cache " + path.string());
  std::vector<MetricsCacheEntry> out;
  try {
    const auto arr = nlohmann::json::parse(in);
    for (const auto& item : arr) {
      MetricsCacheEntry e;
      e.video_id = item.at("video_id").get<std::string>();
      e.metrics.entropy = item.at("H").get<std::vector<double>>();
      e.metrics.ptri = item.at("delta").get<std::vector<double>>();
      e.metrics.pctri = item.at("gamma").get<std::vector<double>>();
      out.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw LoadError("metrics cache " + path.string() + ": " + ex.what());
  }
  return out;
}

}  // namespace vsum
