#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace cbprior {

// Partition of the token indices [0, N) into k non-empty clusters.
//
// Labels are canonical: clusters are numbered by ascending smallest member,
// so the cluster holding token 0 is cluster 0, and so on. Every constructor
// path goes through from_labels(), which enforces this.
class ClusterAssignment {
 public:
  // Relabels an arbitrary labelling canonically. Any integer values are
  // accepted as raw labels; only equality between them matters.
  static ClusterAssignment from_labels(std::span<const std::int64_t> raw);
  static ClusterAssignment from_labels(std::span<const std::int32_t> raw);
  static ClusterAssignment identity(std::size_t n_tokens);

  std::size_t n_tokens() const { return labels_.size(); }
  std::size_t n_clusters() const { return members_.size(); }
  const std::vector<std::int32_t>& labels() const { return labels_; }
  std::int32_t label(std::size_t token) const { return labels_[token]; }
  // Sorted member token indices of each cluster.
  const std::vector<std::vector<std::int32_t>>& members() const { return members_; }
  std::vector<std::size_t> sizes() const;

  friend bool operator==(const ClusterAssignment& a, const ClusterAssignment& b) {
    return a.labels_ == b.labels_;
  }

 private:
  std::vector<std::int32_t> labels_;
  std::vector<std::vector<std::int32_t>> members_;
};

// One agglomerative merge. Clusters are named by their representative, the
// smallest member token index; the survivor always has the smaller one.
struct MergeStep {
  std::int32_t survivor = 0;
  std::int32_t absorbed = 0;
  double distance = 0.0;  // average inter-cluster distance at merge time

  friend bool operator==(const MergeStep&, const MergeStep&) = default;
};

using MergeTrace = std::vector<MergeStep>;

struct ClusteringResult {
  ClusterAssignment assignment;
  MergeTrace trace;
};

// Replays the first n_tokens - k merges of `trace` from singletons.
ClusterAssignment cut_trace(const MergeTrace& trace, std::size_t n_tokens, std::size_t k);

// trace.jsonl: one {"a": int, "b": int, "dist": float} object per line.
void write_trace_jsonl(const MergeTrace& trace, const std::filesystem::path& path);
MergeTrace read_trace_jsonl(const std::filesystem::path& path);

// labels.npy: int32 vector of length N.
void write_labels_npy(const ClusterAssignment& assignment, const std::filesystem::path& path);
ClusterAssignment read_labels_npy(const std::filesystem::path& path);

}  // namespace cbprior
