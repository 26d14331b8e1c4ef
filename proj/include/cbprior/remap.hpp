#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cbprior/assignment.hpp"

namespace cbprior {

using TokenSequence = std::vector<std::int32_t>;

// output[i] = labels[seq[i]].
TokenSequence remap_to_clusters(std::span<const std::int32_t> seq,
                                const ClusterAssignment& assignment);

// Replaces each cluster index by a uniformly drawn member token. Position i
// draws from its own stream derived from (seed, i), so the output does not
// depend on how the sequence is chunked.
TokenSequence decode_random_selection(std::span<const std::int32_t> cluster_seq,
                                      const ClusterAssignment& assignment, std::uint64_t seed);

enum class LogitAggregation { mean, sum };

std::vector<double> aggregate_cluster_logits(std::span<const double> token_logits,
                                             const ClusterAssignment& assignment,
                                             LogitAggregation mode);

}  // namespace cbprior
