#pragma once

#include <cmath>
#include <span>
#include <string_view>

namespace cbprior {

enum class Metric {
  euclidean,
  // 1 - cos(a, b). Extension only; not part of the reference behaviour.
  cosine,
};

Metric metric_from_string(std::string_view name);

inline double squared_euclidean(std::span<const double> a, std::span<const double> b) {
  // Four independent accumulators break the add dependency chain. Every
  // distance in the library goes through here, so all routes agree bitwise.
  const std::size_t n = a.size();
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (std::size_t l = 0; l < 4; ++l) {
      const double diff = a[i + l] - b[i + l];
      acc[l] += diff * diff;
    }
  }
  for (; i < n; ++i) {
    const double diff = a[i] - b[i];
    acc[0] += diff * diff;
  }
  return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

inline double euclidean(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_euclidean(a, b));
}

double cosine_distance(std::span<const double> a, std::span<const double> b);

inline double distance(Metric metric, std::span<const double> a, std::span<const double> b) {
  return metric == Metric::euclidean ? euclidean(a, b) : cosine_distance(a, b);
}

}  // namespace cbprior
