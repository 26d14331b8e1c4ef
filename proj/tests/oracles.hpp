#pragma once

// Test-only reference implementations. These deliberately share no code with
// the library's clustering or search paths: distances are recomputed with a
// plain loop and clusters are tracked as explicit member lists.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "cbprior/codebook.hpp"

namespace oracle {

inline double plain_distance(const cbprior::Codebook& cb, std::size_t a, std::size_t b) {
  double s = 0.0;
  for (std::size_t j = 0; j < cb.dim(); ++j) {
    const double diff = cb[a][j] - cb[b][j];
    s += diff * diff;
  }
  return std::sqrt(s);
}

inline double plain_distance(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += (x[j] - y[j]) * (x[j] - y[j]);
  return std::sqrt(s);
}

struct Merge {
  int survivor;
  int absorbed;
  double distance;
};

struct AgglomerativeResult {
  std::vector<int> labels;  // canonical: numbered by smallest member
  std::vector<Merge> trace;
};

inline std::vector<int> canonical(const std::vector<std::vector<int>>& clusters, std::size_t n) {
  // clusters are kept ordered by smallest member, so their index is canonical
  std::vector<int> labels(n, -1);
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    for (int t : clusters[c]) labels[t] = static_cast<int>(c);
  }
  return labels;
}

// Textbook UPGMA: every step recomputes every cluster-pair average from the
// full token distance table. Clusters are a list ordered by smallest member;
// the first strictly smaller average wins, which is the (avg, a, b) tie-break.
// Whether `sizes` can be split into k groups each summing to at most cap.
// Exhaustive up to swapping bins of equal load.
inline bool packable(std::vector<std::size_t> sizes, std::size_t k, std::size_t cap) {
  std::vector<std::size_t> load(k, 0);
  auto place = [&](auto&& self, std::size_t i) -> bool {
    if (i == sizes.size()) return true;
    for (std::size_t bin = 0; bin < k; ++bin) {
      if (load[bin] + sizes[i] > cap) continue;
      bool seen = false;
      for (std::size_t earlier = 0; earlier < bin; ++earlier) seen = seen || load[earlier] == load[bin];
      if (seen) continue;
      load[bin] += sizes[i];
      if (self(self, i + 1)) return true;
      load[bin] -= sizes[i];
    }
    return false;
  };
  return place(place, 0);
}

// With `require_packable`, a capped merge is also skipped unless the sizes
// after it can still be packed into k bins of capacity cap.
inline AgglomerativeResult upgma(const cbprior::Codebook& cb, std::size_t k,
                                 std::optional<std::size_t> cap = std::nullopt,
                                 bool require_packable = false) {
  const std::size_t n = cb.size();
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) dist[i][j] = plain_distance(cb, i, j);
  }
  std::vector<std::vector<int>> clusters;
  for (std::size_t i = 0; i < n; ++i) clusters.push_back({static_cast<int>(i)});

  AgglomerativeResult out;
  while (clusters.size() > k) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    bool found = false;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        if (cap && clusters[i].size() + clusters[j].size() > *cap) continue;
        if (cap && require_packable) {
          std::vector<std::size_t> after;
          for (std::size_t c = 0; c < clusters.size(); ++c) {
            if (c != i && c != j) after.push_back(clusters[c].size());
          }
          after.push_back(clusters[i].size() + clusters[j].size());
          if (!packable(after, k, *cap)) continue;
        }
        double s = 0.0;
        for (int p : clusters[i]) {
          for (int q : clusters[j]) s += dist[p][q];
        }
        const double avg = s / static_cast<double>(clusters[i].size() * clusters[j].size());
        if (avg < best) {
          best = avg;
          bi = i;
          bj = j;
          found = true;
        }
      }
    }
    if (!found) break;
    out.trace.push_back({clusters[bi].front(), clusters[bj].front(), best});
    // Survivor keeps its smallest member first; order of the rest is irrelevant.
    clusters[bi].insert(clusters[bi].end(), clusters[bj].begin(), clusters[bj].end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
  }
  out.labels = canonical(clusters, n);
  return out;
}

// Centroid-linkage counterpart of upgma(), same loop and tie-break.
inline AgglomerativeResult centroid_linkage(const cbprior::Codebook& cb, std::size_t k) {
  const std::size_t n = cb.size();
  std::vector<std::vector<int>> clusters;
  for (std::size_t i = 0; i < n; ++i) clusters.push_back({static_cast<int>(i)});
  auto mean = [&](const std::vector<int>& members) {
    std::vector<double> m(cb.dim(), 0.0);
    for (int t : members) {
      for (std::size_t j = 0; j < cb.dim(); ++j) m[j] += cb[t][j];
    }
    for (auto& x : m) x /= static_cast<double>(members.size());
    return m;
  };
  AgglomerativeResult out;
  while (clusters.size() > k) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      const auto mi = mean(clusters[i]);
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        const double d = plain_distance(mi, mean(clusters[j]));
        if (d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    }
    out.trace.push_back({clusters[bi].front(), clusters[bj].front(), best});
    clusters[bi].insert(clusters[bi].end(), clusters[bj].begin(), clusters[bj].end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
  }
  out.labels = canonical(clusters, n);
  return out;
}

// Lowest-index nearest codebook row for one query, by exhaustive scan.
inline std::size_t nearest_token(const cbprior::Codebook& cb, std::span<const double> query,
                                 double* dist_out = nullptr) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < cb.size(); ++t) {
    const double d = plain_distance(query, cb[t]);
    if (d < best_d) {
      best_d = d;
      best = t;
    }
  }
  if (dist_out) *dist_out = best_d;
  return best;
}

// All set partitions of [0, n) into exactly k blocks, as canonical label vectors.
inline void enumerate_partitions(std::size_t n, std::size_t k, std::vector<int>& current,
                                 int used, std::vector<std::vector<int>>& out) {
  if (current.size() == n) {
    if (static_cast<std::size_t>(used) == k) out.push_back(current);
    return;
  }
  for (int c = 0; c <= used && c < static_cast<int>(k); ++c) {
    current.push_back(c);
    enumerate_partitions(n, k, current, std::max(used, c + 1), out);
    current.pop_back();
  }
}

inline std::vector<std::vector<int>> partitions(std::size_t n, std::size_t k) {
  std::vector<std::vector<int>> out;
  std::vector<int> current;
  enumerate_partitions(n, k, current, 0, out);
  return out;
}

// Within-cluster sum of squared distances to the cluster mean.
inline double sse(const cbprior::Codebook& cb, const std::vector<int>& labels) {
  int k = 0;
  for (int l : labels) k = std::max(k, l + 1);
  double total = 0.0;
  for (int c = 0; c < k; ++c) {
    std::vector<double> m(cb.dim(), 0.0);
    int count = 0;
    for (std::size_t t = 0; t < labels.size(); ++t) {
      if (labels[t] != c) continue;
      ++count;
      for (std::size_t j = 0; j < cb.dim(); ++j) m[j] += cb[t][j];
    }
    for (auto& x : m) x /= count;
    for (std::size_t t = 0; t < labels.size(); ++t) {
      if (labels[t] == c) total += plain_distance(cb[t], m) * plain_distance(cb[t], m);
    }
  }
  return total;
}

}  // namespace oracle
