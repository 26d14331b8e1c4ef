#pragma once

#include <cstdint>
#include <map>

#include "cbprior/assignment.hpp"
#include "cbprior/codebook.hpp"

namespace cbprior {

struct ClusterQualityReport {
  // Mean over clusters of the mean pairwise member distance; singletons count as 0.
  double mean_intra_pairwise = 0.0;
  std::map<std::size_t, std::size_t> size_histogram;  // cluster size -> number of clusters
  double size_std = 0.0;                              // population standard deviation
  std::size_t n_clusters = 0;
  std::size_t n_tokens = 0;
};

ClusterQualityReport quality_report(const Codebook& codebook, const ClusterAssignment& assignment);

// Quantizes each query, swaps its token for a random member of the same
// cluster, and returns the mean Euclidean distance between the original and
// replacement token vectors over all queries and trials. Trial t decodes
// with seed derive_seed(seed, t).
double replacement_distortion(const Codebook& codebook, const ClusterAssignment& assignment,
                              const Matrix& queries, std::uint64_t seed, std::size_t trials);

}  // namespace cbprior
