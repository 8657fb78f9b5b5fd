#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <string_view>

namespace vsum {

/// N frames by d feature dimensions; rows are contiguous so a frame can be
/// viewed as a span.
using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// U users by n_frames {0,1} selections.
using BinaryMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Inclusive frame range [start, end].
struct FrameRange {
  std::int64_t start = 0;
  std::int64_t end = 0;

  std::int64_t length() const noexcept { return end - start + 1; }
  bool operator==(const FrameRange&) const = default;
};

/// 64-bit FNV-1a, used for config, parameter and dataset fingerprints.
inline std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  return fnv1a64(s.data(), s.size(), h);
}

std::string to_hex(std::uint64_t v);

}  // namespace vsum
