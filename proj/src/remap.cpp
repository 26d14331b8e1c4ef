#include "cbprior/remap.hpp"

#include <cmath>
#include <string>

#include "cbprior/error.hpp"
#include "cbprior/rng.hpp"

namespace cbprior {

TokenSequence remap_to_clusters(std::span<const std::int32_t> seq,
                                const ClusterAssignment& assignment) {
  const auto n = static_cast<std::int64_t>(assignment.n_tokens());
  TokenSequence out(seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (seq[i] < 0 || seq[i] >= n) {
      throw InvalidArgument("remap: token index " + std::to_string(seq[i]) + " at position " +
                            std::to_string(i) + " outside [0, " + std::to_string(n) + ")");
    }
    out[i] = assignment.label(static_cast<std::size_t>(seq[i]));
  }
  return out;
}

TokenSequence decode_random_selection(std::span<const std::int32_t> cluster_seq,
                                      const ClusterAssignment& assignment, std::uint64_t seed) {
  const auto k = static_cast<std::int64_t>(assignment.n_clusters());
  const auto& members = assignment.members();
  TokenSequence out(cluster_seq.size());
  for (std::size_t i = 0; i < cluster_seq.size(); ++i) {
    const std::int32_t c = cluster_seq[i];
    if (c < 0 || c >= k) {
      throw InvalidArgument("decode: cluster index " + std::to_string(c) + " at position " +
                            std::to_string(i) + " outside [0, " + std::to_string(k) + ")");
    }
    const auto& pool = members[static_cast<std::size_t>(c)];
    SplitMix64 gen(derive_seed(seed, i));
    out[i] = pool[uniform_below(gen, pool.size())];
  }
  return out;
}

std::vector<double> aggregate_cluster_logits(std::span<const double> token_logits,
                                             const ClusterAssignment& assignment,
                                             LogitAggregation mode) {
  if (token_logits.size() != assignment.n_tokens()) {
    throw InvalidArgument("aggregate_cluster_logits: " + std::to_string(token_logits.size()) +
                          " logits for " + std::to_string(assignment.n_tokens()) + " tokens");
  }
  std::vector<double> out(assignment.n_clusters(), 0.0);
  const auto& members = assignment.members();
  for (std::size_t c = 0; c < members.size(); ++c) {
    double total = 0.0;
    for (std::int32_t t : members[c]) {
      if (!std::isfinite(token_logits[t])) {
        throw InvalidArgument("aggregate_cluster_logits: non-finite logit for token " +
                              std::to_string(t));
      }
      total += token_logits[t];
    }
    out[c] = mode == LogitAggregation::sum ? total : total / static_cast<double>(members[c].size());
  }
  return out;
}

}  // namespace cbprior
