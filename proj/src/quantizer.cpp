#include "cbprior/quantizer.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "cbprior/distance.hpp"
#include "cbprior/error.hpp"
#include "cbprior/parallel.hpp"

namespace cbprior {

QuantizeResult quantize(const Matrix& queries, const Codebook& codebook) {
  if (queries.rows() > 0 && queries.cols() != codebook.dim()) {
    throw InvalidArgument("quantize: query dimension " + std::to_string(queries.cols()) +
                          " does not match codebook dimension " + std::to_string(codebook.dim()));
  }
  if (!all_finite(queries)) throw InvalidArgument("quantize: queries contain non-finite values");

  QuantizeResult result;
  result.indices.resize(queries.rows());
  result.distances.resize(queries.rows());
  parallel_for(queries.rows(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t q = begin; q < end; ++q) {
      const auto query = queries.row(q);
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_token = 0;
      for (std::size_t t = 0; t < codebook.size(); ++t) {
        // Squared distances preserve the argmin; strict < keeps the lowest index on ties.
        const double d2 = squared_euclidean(query, codebook[t]);
        if (d2 < best) {
          best = d2;
          best_token = t;
        }
      }
      result.indices[q] = static_cast<std::int32_t>(best_token);
      result.distances[q] = std::sqrt(best);
    }
  });
  return result;
}

}  // namespace cbprior
