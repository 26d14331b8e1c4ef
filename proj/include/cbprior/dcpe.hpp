#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cbprior/assignment.hpp"
#include "cbprior/codebook.hpp"
#include "cbprior/distance.hpp"

namespace cbprior {

// Live state of the incremental average-linkage algorithm.
//
// Slots are indexed by token; a live cluster occupies the slot of its
// representative (smallest member). For live a != b, sum(a, b) is the sum of
// all member-pair distances between the two clusters, so
// sum(a, b) / (size(a) * size(b)) is their average-linkage distance.
// Sums are float64 regardless of input precision. Storage is the strict upper
// triangle, N(N-1)/2 doubles.
class DistanceState {
 public:
  DistanceState(const Codebook& codebook, Metric metric = Metric::euclidean);

  std::size_t capacity() const { return n_; }
  std::size_t n_active() const { return n_active_; }
  bool active(std::size_t c) const { return active_[c] != 0; }
  const std::vector<std::uint8_t>& active_flags() const { return active_; }
  std::size_t size(std::size_t c) const { return sizes_[c]; }

  double sum(std::size_t a, std::size_t b) const {
    return a < b ? sums_[index(a, b)] : sums_[index(b, a)];
  }
  double average(std::size_t a, std::size_t b) const {
    return sum(a, b) / (static_cast<double>(sizes_[a]) * static_cast<double>(sizes_[b]));
  }

  // Folds cluster `absorbed` into `survivor` (survivor < absorbed): row and
  // column sums are added, sizes added, and `absorbed` deactivated.
  void merge(std::size_t survivor, std::size_t absorbed);

  std::size_t matrix_bytes() const { return sums_.size() * sizeof(double); }

 private:
  std::size_t index(std::size_t a, std::size_t b) const {
    return a * (2 * n_ - a - 1) / 2 + (b - a - 1);
  }

  std::size_t n_;
  std::size_t n_active_;
  std::vector<double> sums_;
  std::vector<std::size_t> sizes_;
  std::vector<std::uint8_t> active_;
};

enum class ArgminKey {
  // Minimise sum / (size_a * size_b): the average inter-cluster distance.
  average,
  // Minimise the raw summed distance, as a literal reading of the matrix
  // pseudocode would. Kept for comparison only.
  literal_sum,
};

enum class ScanStrategy {
  // Per-row cached minima, refreshed only for rows touched by a merge. Exact:
  // selects the same pair as a full scan under the same tie-break.
  row_cache,
  // Scan every live pair at every step.
  full_scan,
};

struct DcpeOptions {
  // Pairs whose merged size would exceed this are skipped during argmin.
  std::optional<std::size_t> max_cluster_size;
  Metric metric = Metric::euclidean;
  ArgminKey argmin = ArgminKey::average;
  ScanStrategy scan = ScanStrategy::row_cache;
};

// Greedy average-linkage clustering from N singletons down to k clusters,
// recomputing every inter-cluster average from the raw vectors at each step.
// O(N^3 d). Reference implementation for dcpe_optimized.
//
// Tie-break for all agglomerative routines: among minimal pairs (a, b), a < b
// by representative, pick the smallest a, then the smallest b.
ClusteringResult dcpe_naive(const Codebook& codebook, std::size_t k,
                            Metric metric = Metric::euclidean);

// Same clustering driven by DistanceState: distances are computed once, then
// merges update row/column sums in O(N). Without a cap the result is identical
// to dcpe_naive.
ClusteringResult dcpe_optimized(const Codebook& codebook, std::size_t k,
                                const DcpeOptions& options = {});

// Default size cap used when integrating with equal-size-assuming pipelines: ceil(N / k).
std::size_t default_cluster_cap(std::size_t n_tokens, std::size_t k);

}  // namespace cbprior
