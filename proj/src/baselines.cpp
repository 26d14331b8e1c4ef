#include "cbprior/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <tuple>

#include "cbprior/distance.hpp"
#include "cbprior/error.hpp"
#include "cbprior/parallel.hpp"
#include "cbprior/rng.hpp"
#include "row_min_cache.hpp"

namespace cbprior {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_config(const Codebook& codebook, const KMeansConfig& config, const char* who) {
  if (config.k < 1 || config.k > codebook.size()) {
    throw InvalidArgument(std::string(who) + ": k=" + std::to_string(config.k) + " outside [1, " +
                          std::to_string(codebook.size()) + "]");
  }
  if (config.max_iters < 1) throw InvalidArgument(std::string(who) + ": max_iters must be >= 1");
  if (!(config.tol >= 0.0)) throw InvalidArgument(std::string(who) + ": tol must be >= 0");
}

ClusterAssignment single_cluster(std::size_t n) {
  std::vector<std::int32_t> labels(n, 0);
  return ClusterAssignment::from_labels(std::span<const std::int32_t>(labels));
}

// Indices of the k tokens that seed the centroids.
std::vector<std::size_t> seed_tokens(const Codebook& codebook, const KMeansConfig& config) {
  const std::size_t n = codebook.size();
  SplitMix64 gen(derive_seed(config.seed, 0));
  std::vector<std::size_t> chosen;
  chosen.reserve(config.k);
  if (config.init == KMeansInit::random_tokens) {
    // Partial Fisher-Yates: the first k slots become a uniform k-subset.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i < config.k; ++i) {
      const std::size_t j = i + uniform_below(gen, n - i);
      std::swap(order[i], order[j]);
      chosen.push_back(order[i]);
    }
    return chosen;
  }

  std::vector<std::uint8_t> taken(n, 0);
  std::vector<double> d2(n, kInf);
  chosen.push_back(uniform_below(gen, n));
  taken[chosen.back()] = 1;
  while (chosen.size() < config.k) {
    const auto last = codebook[chosen.back()];
    double total = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      d2[t] = std::min(d2[t], squared_euclidean(codebook[t], last));
      if (!taken[t]) total += d2[t];
    }
    std::size_t pick = n;
    if (total > 0.0) {
      double target = uniform_unit(gen) * total;
      for (std::size_t t = 0; t < n; ++t) {
        if (taken[t]) continue;
        pick = t;
        target -= d2[t];
        if (target < 0.0) break;
      }
    } else {
      // Only duplicates of chosen tokens remain: pick uniformly among them.
      std::size_t nth = uniform_below(gen, n - chosen.size());
      for (std::size_t t = 0; t < n; ++t) {
        if (taken[t]) continue;
        if (nth-- == 0) {
          pick = t;
          break;
        }
      }
    }
    taken[pick] = 1;
    chosen.push_back(pick);
  }
  return chosen;
}

Matrix gather_rows(const Codebook& codebook, const std::vector<std::size_t>& tokens) {
  Matrix out(tokens.size(), codebook.dim());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::copy_n(codebook[tokens[i]].begin(), codebook.dim(), out.row(i).begin());
  }
  return out;
}

// Arithmetic means per label. Clusters with no members keep their old centroid.
void update_centroids(const Codebook& codebook, const std::vector<std::int32_t>& labels,
                      Matrix& centroids) {
  const std::size_t k = centroids.rows();
  Matrix sums(k, codebook.dim());
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t t = 0; t < labels.size(); ++t) {
    auto s = sums.row(labels[t]);
    const auto v = codebook[t];
    for (std::size_t j = 0; j < s.size(); ++j) s[j] += v[j];
    ++counts[labels[t]];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) continue;
    auto dst = centroids.row(c);
    const auto s = sums.row(c);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = s[j] / static_cast<double>(counts[c]);
  }
}

// Moves the worst-fit token (largest cost among clusters with more than one
// member) into each empty cluster in turn. `cost[t]` is the token's current
// assignment cost and is zeroed for moved tokens.
template <class OnMove>
void repair_empty_clusters(std::vector<std::int32_t>& labels, std::vector<double>& cost,
                           std::size_t k, OnMove on_move) {
  std::vector<std::size_t> counts(k, 0);
  for (auto l : labels) ++counts[l];
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] != 0) continue;
    std::size_t worst = labels.size();
    double worst_cost = -1.0;
    for (std::size_t t = 0; t < labels.size(); ++t) {
      if (counts[labels[t]] > 1 && cost[t] > worst_cost) {
        worst_cost = cost[t];
        worst = t;
      }
    }
    --counts[labels[worst]];
    labels[worst] = static_cast<std::int32_t>(c);
    counts[c] = 1;
    cost[worst] = 0.0;
    on_move(worst, c);
  }
}

std::size_t nearest_centroid(std::span<const double> v, const Matrix& centroids, double& best) {
  best = kInf;
  std::size_t arg = 0;
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double d2 = squared_euclidean(v, centroids.row(c));
    if (d2 < best) {
      best = d2;
      arg = c;
    }
  }
  return arg;
}

}  // namespace

double within_cluster_sse(const Codebook& codebook, const ClusterAssignment& assignment) {
  Matrix centroids(assignment.n_clusters(), codebook.dim());
  update_centroids(codebook, assignment.labels(), centroids);
  double sse = 0.0;
  for (std::size_t t = 0; t < codebook.size(); ++t) {
    sse += squared_euclidean(codebook[t], centroids.row(assignment.label(t)));
  }
  return sse;
}

ClusterAssignment kmeans(const Codebook& codebook, const KMeansConfig& config,
                         KMeansDiagnostics* diagnostics) {
  check_config(codebook, config, "kmeans");
  const std::size_t n = codebook.size();
  KMeansDiagnostics local;
  KMeansDiagnostics& diag = diagnostics ? *diagnostics : local;
  diag = {};
  if (config.k == n) {
    diag.converged = true;
    return ClusterAssignment::identity(n);
  }

  Matrix centroids = gather_rows(codebook, seed_tokens(codebook, config));
  std::vector<std::int32_t> labels(n, -1);
  std::vector<std::int32_t> next(n);
  std::vector<double> cost(n);
  for (std::size_t it = 0; it < config.max_iters; ++it) {
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
      for (std::size_t t = begin; t < end; ++t) {
        next[t] = static_cast<std::int32_t>(nearest_centroid(codebook[t], centroids, cost[t]));
      }
    });
    repair_empty_clusters(next, cost, config.k, [&](std::size_t token, std::size_t c) {
      std::copy_n(codebook[token].begin(), codebook.dim(), centroids.row(c).begin());
    });
    diag.iterations = it + 1;
    diag.inertia.push_back(std::accumulate(cost.begin(), cost.end(), 0.0));
    if (next == labels) {
      diag.converged = true;
      break;
    }
    labels = next;
    Matrix previous = centroids;
    update_centroids(codebook, labels, centroids);
    double shift = 0.0;
    for (std::size_t c = 0; c < config.k; ++c) {
      shift = std::max(shift, euclidean(previous.row(c), centroids.row(c)));
    }
    if (shift < config.tol) {
      diag.converged = true;
      break;
    }
  }
  return ClusterAssignment::from_labels(std::span<const std::int32_t>(labels));
}

ClusterAssignment kmeans_balanced(const Codebook& codebook, const KMeansConfig& config) {
  check_config(codebook, config, "kmeans_balanced");
  const std::size_t n = codebook.size();
  const std::size_t k = config.k;
  if (k == n) return ClusterAssignment::identity(n);
  if (k == 1) return single_cluster(n);

  const std::size_t base = n / k;
  const std::size_t n_large = n % k;  // clusters allowed base + 1 members

  Matrix centroids = gather_rows(codebook, seed_tokens(codebook, config));
  std::vector<std::int32_t> labels;
  std::vector<double> d2(n * k);
  std::vector<std::uint32_t> order(n * k);

  for (std::size_t it = 0; it < config.max_iters; ++it) {
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
      for (std::size_t t = begin; t < end; ++t) {
        for (std::size_t c = 0; c < k; ++c) d2[t * k + c] = squared_euclidean(codebook[t], centroids.row(c));
      }
    });
    std::iota(order.begin(), order.end(), 0u);
    // Ascending distance, then token, then centroid: a total order.
    std::sort(order.begin(), order.end(), [&](std::uint32_t x, std::uint32_t y) {
      return d2[x] < d2[y] || (d2[x] == d2[y] && x < y);
    });

    std::vector<std::int32_t> next(n, -1);
    std::vector<std::size_t> counts(k, 0);
    std::size_t large_used = 0;
    std::size_t assigned = 0;
    for (std::uint32_t pair : order) {
      const std::size_t t = pair / k;
      const std::size_t c = pair % k;
      if (next[t] >= 0) continue;
      if (counts[c] < base) {
        ++counts[c];
      } else if (counts[c] == base && large_used < n_large) {
        ++counts[c];
        ++large_used;
      } else {
        continue;
      }
      next[t] = static_cast<std::int32_t>(c);
      if (++assigned == n) break;
    }

    // Size-preserving refinement: exchange two tokens between clusters when it
    // lowers the summed squared distance to the current centroids.
    bool swapped = true;
    for (std::size_t pass = 0; swapped && pass < 100; ++pass) {
      swapped = false;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          const std::size_t ci = static_cast<std::size_t>(next[i]);
          const std::size_t cj = static_cast<std::size_t>(next[j]);
          if (ci == cj) continue;
          const double before = d2[i * k + ci] + d2[j * k + cj];
          const double after = d2[i * k + cj] + d2[j * k + ci];
          if (after < before - 1e-12 * (1.0 + before)) {
            std::swap(next[i], next[j]);
            swapped = true;
          }
        }
      }
    }

    if (next == labels) break;
    labels = std::move(next);
    update_centroids(codebook, labels, centroids);
  }
  return ClusterAssignment::from_labels(std::span<const std::int32_t>(labels));
}

ClusteringResult agglomerative_centroid(const Codebook& codebook, std::size_t k) {
  const std::size_t n = codebook.size();
  if (k < 1 || k > n) {
    throw InvalidArgument("agglomerative_centroid: k=" + std::to_string(k) + " outside [1, " +
                          std::to_string(n) + "]");
  }
  Matrix sums = codebook.vectors();
  Matrix centroids = codebook.vectors();
  std::vector<std::size_t> sizes(n, 1);
  std::vector<std::uint8_t> active(n, 1);
  std::size_t n_active = n;

  auto key = [&centroids](std::size_t a, std::size_t b) {
    return euclidean(centroids.row(a), centroids.row(b));
  };
  detail::RowMinCache cache(active, key);

  MergeTrace trace;
  trace.reserve(n - k);
  while (n_active > k) {
    const auto [a, b] = *cache.best_pair();
    trace.push_back({static_cast<std::int32_t>(a), static_cast<std::int32_t>(b), key(a, b)});
    auto sa = sums.row(a);
    const auto sb = sums.row(b);
    sizes[a] += sizes[b];
    auto ca = centroids.row(a);
    for (std::size_t j = 0; j < sa.size(); ++j) {
      sa[j] += sb[j];
      ca[j] = sa[j] / static_cast<double>(sizes[a]);
    }
    active[b] = 0;
    --n_active;
    cache.after_merge(a, b);
  }
  auto assignment = cut_trace(trace, n, k);
  return {std::move(assignment), std::move(trace)};
}

ClusterAssignment kmeans_instance_distance(const Codebook& codebook, const KMeansConfig& config,
                                           KMeansDiagnostics* diagnostics) {
  check_config(codebook, config, "kmeans_instance_distance");
  const std::size_t n = codebook.size();
  const std::size_t k = config.k;
  KMeansDiagnostics local;
  KMeansDiagnostics& diag = diagnostics ? *diagnostics : local;
  diag = {};
  if (k == n) {
    diag.converged = true;
    return ClusterAssignment::identity(n);
  }
  if (k == 1) {
    diag.converged = true;
    return single_cluster(n);
  }

  // Same initial state as kmeans(): seed tokens, nearest-seed assignment.
  const Matrix seeds = gather_rows(codebook, seed_tokens(codebook, config));
  std::vector<std::int32_t> labels(n);
  std::vector<double> cost(n);
  for (std::size_t t = 0; t < n; ++t) {
    labels[t] = static_cast<std::int32_t>(nearest_centroid(codebook[t], seeds, cost[t]));
  }
  repair_empty_clusters(labels, cost, k, [](std::size_t, std::size_t) {});

  std::vector<std::int32_t> next(n);
  for (std::size_t it = 0; it < config.max_iters; ++it) {
    std::vector<std::size_t> counts(k, 0);
    for (auto l : labels) ++counts[l];
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
      std::vector<double> totals(k);
      for (std::size_t t = begin; t < end; ++t) {
        std::fill(totals.begin(), totals.end(), 0.0);
        for (std::size_t u = 0; u < n; ++u) totals[labels[u]] += euclidean(codebook[t], codebook[u]);
        double best = kInf;
        std::size_t arg = 0;
        for (std::size_t c = 0; c < k; ++c) {
          const double mean = totals[c] / static_cast<double>(counts[c]);
          if (mean < best) {
            best = mean;
            arg = c;
          }
        }
        next[t] = static_cast<std::int32_t>(arg);
        cost[t] = best;
      }
    });
    repair_empty_clusters(next, cost, k, [](std::size_t, std::size_t) {});
    diag.iterations = it + 1;
    diag.inertia.push_back(std::accumulate(cost.begin(), cost.end(), 0.0));
    if (next == labels) {
      diag.converged = true;
      break;
    }
    labels = next;
  }
  return ClusterAssignment::from_labels(std::span<const std::int32_t>(labels));
}

}  // namespace cbprior
