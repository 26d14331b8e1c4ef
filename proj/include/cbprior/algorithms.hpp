#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cbprior/assignment.hpp"
#include "cbprior/codebook.hpp"
#include "cbprior/dcpe.hpp"

namespace cbprior {

// Flat parameter bag shared by the CLI and the bench harness. Each algorithm
// reads the fields it understands and ignores the rest.
struct AlgorithmParams {
  std::size_t k = 1;
  std::optional<std::size_t> max_cluster_size;  // dcpe only
  Metric metric = Metric::euclidean;            // dcpe, dcpe-naive
  ArgminKey argmin = ArgminKey::average;        // dcpe only
  ScanStrategy scan = ScanStrategy::row_cache;  // dcpe only
  std::size_t max_iters = 100;
  std::uint64_t seed = 0;
  double tol = 0.0;
};

struct AlgorithmOutput {
  ClusterAssignment assignment;
  std::optional<MergeTrace> trace;  // agglomerative algorithms only
};

// Registered ids: dcpe, dcpe-naive, kmeans, kmeanspp, kmeans-balanced,
// agg-centroid, kmeans-instance.
const std::vector<std::string>& algorithm_ids();
bool is_algorithm(std::string_view id);
bool is_deterministic(std::string_view id);  // ignores the seed

AlgorithmOutput run_algorithm(std::string_view id, const Codebook& codebook,
                              const AlgorithmParams& params);

// Size of the largest working table the algorithm allocates for this input.
std::size_t working_matrix_bytes(std::string_view id, std::size_t n_tokens, std::size_t dim,
                                 std::size_t k);

}  // namespace cbprior
