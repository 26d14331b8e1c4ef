#pragma once

#include <cstdint>
#include <vector>

#include "cbprior/codebook.hpp"

namespace cbprior {

struct QuantizeResult {
  std::vector<std::int32_t> indices;
  std::vector<double> distances;  // Euclidean, not squared
};

// Exact nearest-token lookup. Ties resolve to the lowest token index.
QuantizeResult quantize(const Matrix& queries, const Codebook& codebook);

}  // namespace cbprior
