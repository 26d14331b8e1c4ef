#pragma once

#include <cstdint>
#include <vector>

#include "cbprior/assignment.hpp"
#include "cbprior/codebook.hpp"

namespace cbprior {

enum class KMeansInit { random_tokens, plusplus };

struct KMeansConfig {
  std::size_t k = 1;
  std::size_t max_iters = 100;
  std::uint64_t seed = 0;
  KMeansInit init = KMeansInit::random_tokens;
  double tol = 0.0;  // stop once the largest centroid shift is below this
};

struct KMeansDiagnostics {
  std::size_t iterations = 0;
  // Within-cluster sum of squared distances after each assignment step.
  std::vector<double> inertia;
  bool converged = false;
};

// Lloyd's algorithm. Empty clusters are re-seeded with the token farthest from
// its current centroid. Ties in assignment go to the lowest centroid index.
ClusterAssignment kmeans(const Codebook& codebook, const KMeansConfig& config,
                         KMeansDiagnostics* diagnostics = nullptr);

// Equal-size variant: capacity-constrained greedy assignment (pairs sorted by
// distance, each cluster holding floor(N/k) or ceil(N/k) tokens) followed by a
// size-preserving swap pass, alternating with centroid updates.
ClusterAssignment kmeans_balanced(const Codebook& codebook, const KMeansConfig& config);

// Greedy agglomerative clustering where the inter-cluster distance is the
// Euclidean distance between cluster means. Same loop and tie-break as the
// average-linkage routines.
ClusteringResult agglomerative_centroid(const Codebook& codebook, std::size_t k);

// Lloyd-style iterations in which a token's cost for cluster C is its mean
// distance to the current members of C (its own zero self-distance included
// when it is a member). Initialized exactly like kmeans().
ClusterAssignment kmeans_instance_distance(const Codebook& codebook, const KMeansConfig& config,
                                           KMeansDiagnostics* diagnostics = nullptr);

// Sum over tokens of the squared distance to their cluster mean.
double within_cluster_sse(const Codebook& codebook, const ClusterAssignment& assignment);

}  // namespace cbprior
