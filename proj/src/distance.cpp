#include "cbprior/distance.hpp"

#include <cmath>
#include <string>

#include "cbprior/error.hpp"

namespace cbprior {

Metric metric_from_string(std::string_view name) {
  if (name == "euclidean") return Metric::euclidean;
  if (name == "cosine") return Metric::cosine;
  throw InvalidArgument("unknown metric '" + std::string(name) + "'");
}

double cosine_distance(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return (na == 0.0 && nb == 0.0) ? 0.0 : 1.0;
  return 1.0 - dot / std::sqrt(na * nb);
}

}  // namespace cbprior
