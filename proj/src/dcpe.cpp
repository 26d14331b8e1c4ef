#include "cbprior/dcpe.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>

#include "cbprior/error.hpp"
#include "cbprior/parallel.hpp"
#include "row_min_cache.hpp"
#include "size_packing.hpp"

namespace cbprior {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_k(std::size_t n, std::size_t k, const char* who) {
  if (k < 1 || k > n) {
    throw InvalidArgument(std::string(who) + ": k=" + std::to_string(k) + " outside [1, " +
                          std::to_string(n) + "]");
  }
}

// Labels from slot ownership: every token points at its representative.
ClusterAssignment assignment_from_owner(const std::vector<std::int32_t>& owner) {
  return ClusterAssignment::from_labels(std::span<const std::int32_t>(owner));
}

// Smallest (key, a, b) pair the packing guard admits. Only reached when the
// unguarded argmin would strand the run; pairs sharing a witness bin are
// always admissible, so this cannot come back empty.
template <class KeyFn>
std::pair<std::size_t, std::size_t> best_admissible(const DistanceState& state, KeyFn& key,
                                                    detail::SizePacking& guard) {
  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  const std::size_t n = state.capacity();
  for (std::size_t a = 0; a < n; ++a) {
    if (!state.active(a)) continue;
    for (std::size_t b = a + 1; b < n; ++b) {
      if (!state.active(b)) continue;
      const double v = key(a, b);
      if (v < kInf) pairs.emplace_back(v, a, b);
    }
  }
  std::sort(pairs.begin(), pairs.end());
  // Admissibility off the witness depends only on the two sizes.
  std::set<std::pair<std::size_t, std::size_t>> rejected;
  for (const auto& [v, a, b] : pairs) {
    if (guard.same_bin(a, b)) return {a, b};
    const std::pair<std::size_t, std::size_t> sizes = std::minmax(state.size(a), state.size(b));
    if (rejected.count(sizes) > 0) continue;
    if (guard.admit(state, a, b)) return {a, b};
    rejected.insert(sizes);
  }
  throw std::logic_error("dcpe_optimized: packing witness offered no admissible merge");
}

}  // namespace

std::size_t default_cluster_cap(std::size_t n_tokens, std::size_t k) {
  if (k == 0) throw InvalidArgument("default_cluster_cap: k must be positive");
  return (n_tokens + k - 1) / k;
}

DistanceState::DistanceState(const Codebook& codebook, Metric metric)
    : n_(codebook.size()),
      n_active_(codebook.size()),
      sums_(n_ * (n_ - 1) / 2),
      sizes_(n_, 1),
      active_(n_, 1) {
  parallel_for(
      n_,
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t a = begin; a < end; ++a) {
          double* row = sums_.data() + (a < n_ - 1 ? index(a, a + 1) : 0);
          for (std::size_t b = a + 1; b < n_; ++b) {
            row[b - a - 1] = distance(metric, codebook[a], codebook[b]);
          }
        }
      },
      16);
}

void DistanceState::merge(std::size_t survivor, std::size_t absorbed) {
  if (survivor >= absorbed || !active_[survivor] || !active_[absorbed]) {
    throw InvalidArgument("DistanceState::merge: expects two live slots with survivor < absorbed");
  }
  const std::size_t a = survivor;
  const std::size_t b = absorbed;
  for (std::size_t c = 0; c < n_; ++c) {
    if (!active_[c] || c == a || c == b) continue;
    const std::size_t dst = c < a ? index(c, a) : index(a, c);
    const std::size_t src = c < b ? index(c, b) : index(b, c);
    sums_[dst] += sums_[src];
  }
  sizes_[a] += sizes_[b];
  sizes_[b] = 0;
  active_[b] = 0;
  --n_active_;
}

ClusteringResult dcpe_naive(const Codebook& codebook, std::size_t k, Metric metric) {
  const std::size_t n = codebook.size();
  const std::size_t d = codebook.dim();
  check_k(n, k, "dcpe_naive");

  std::vector<std::vector<std::int32_t>> members(n);
  for (std::size_t t = 0; t < n; ++t) members[t] = {static_cast<std::int32_t>(t)};
  std::vector<std::size_t> live(n);
  for (std::size_t t = 0; t < n; ++t) live[t] = t;

  struct Candidate {
    double avg = kInf;
    std::size_t i = 0, j = 0;  // positions in `live`
  };

  // Token vectors regrouped so each live cluster is a contiguous block;
  // rebuilt every step. Only the memory layout changes: every average is
  // still summed from raw token distances.
  std::vector<double> packed(n * d);
  std::vector<std::size_t> offset;

  MergeTrace trace;
  trace.reserve(n - k);
  while (live.size() > k) {
    const std::size_t m = live.size();
    offset.assign(m + 1, 0);
    for (std::size_t i = 0; i < m; ++i) {
      std::size_t row = offset[i];
      for (std::int32_t t : members[live[i]]) {
        std::copy_n(codebook[t].begin(), d, packed.begin() + static_cast<std::ptrdiff_t>(row * d));
        ++row;
      }
      offset[i + 1] = row;
    }
    const std::size_t live_rows = offset[m];

    const std::size_t workers = std::max<std::size_t>(1, std::min(thread_count(), m));
    std::vector<Candidate> partial(workers);
    // Each worker owns an interleaved subset of rows; per-worker winners are
    // reduced below in (avg, i, j) order, so the result is thread-count
    // independent.
    parallel_for(
        workers,
        [&](std::size_t wb, std::size_t we) {
          std::vector<double> totals(m);
          for (std::size_t w = wb; w < we; ++w) {
            Candidate best;
            for (std::size_t i = w; i < m; i += workers) {
              // totals[j] = sum of distances between cluster i and cluster j > i,
              // accumulated member by member in one flat pass over later rows.
              std::fill(totals.begin() + static_cast<std::ptrdiff_t>(i) + 1, totals.end(), 0.0);
              const std::size_t tail = offset[i + 1];
              for (std::size_t p = offset[i]; p < offset[i + 1]; ++p) {
                const std::span<const double> vp(packed.data() + p * d, d);
                std::size_t j = i + 1;
                for (std::size_t q = tail; q < live_rows; ++q) {
                  while (q >= offset[j + 1]) ++j;
                  totals[j] += distance(metric, vp, {packed.data() + q * d, d});
                }
              }
              const auto na = static_cast<double>(offset[i + 1] - offset[i]);
              for (std::size_t j = i + 1; j < m; ++j) {
                const double avg =
                    totals[j] / (na * static_cast<double>(offset[j + 1] - offset[j]));
                if (avg < best.avg) best = {avg, i, j};
              }
            }
            partial[w] = best;
          }
        },
        1);
    Candidate best;
    for (const auto& c : partial) {
      if (c.avg < best.avg ||
          (c.avg == best.avg && (c.i < best.i || (c.i == best.i && c.j < best.j)))) {
        best = c;
      }
    }
    const std::size_t a = live[best.i];
    const std::size_t b = live[best.j];
    trace.push_back({static_cast<std::int32_t>(a), static_cast<std::int32_t>(b), best.avg});
    auto& dst = members[a];
    dst.insert(dst.end(), members[b].begin(), members[b].end());
    members[b].clear();
    live.erase(live.begin() + static_cast<std::ptrdiff_t>(best.j));
  }

  std::vector<std::int32_t> owner(n);
  for (std::size_t rep : live) {
    for (std::int32_t t : members[rep]) owner[t] = static_cast<std::int32_t>(rep);
  }
  return {assignment_from_owner(owner), std::move(trace)};
}

ClusteringResult dcpe_optimized(const Codebook& codebook, std::size_t k,
                                const DcpeOptions& options) {
  const std::size_t n = codebook.size();
  check_k(n, k, "dcpe_optimized");
  std::size_t cap = n;
  if (options.max_cluster_size) {
    cap = *options.max_cluster_size;
    // k clusters of at most `cap` tokens must be able to hold all N tokens.
    if (cap < 1 || cap * k < n) {
      throw InvalidArgument("dcpe_optimized: max_cluster_size=" + std::to_string(cap) +
                            " cannot reach k=" + std::to_string(k) + " clusters for N=" +
                            std::to_string(n) + " (need max_cluster_size * k >= N)");
    }
  }

  DistanceState state(codebook, options.metric);
  const bool literal = options.argmin == ArgminKey::literal_sum;
  auto key = [&state, cap, literal](std::size_t a, std::size_t b) {
    if (state.size(a) + state.size(b) > cap) return kInf;
    return literal ? state.sum(a, b) : state.average(a, b);
  };

  MergeTrace trace;
  trace.reserve(n - k);
  auto record = [&](std::size_t a, std::size_t b) {
    trace.push_back(
        {static_cast<std::int32_t>(a), static_cast<std::int32_t>(b), state.average(a, b)});
    state.merge(a, b);
  };
  auto infeasible = [&] {
    return InvalidArgument("dcpe_optimized: no feasible pair under max_cluster_size=" +
                           std::to_string(cap) + " with " + std::to_string(state.n_active()) +
                           " clusters left (target k=" + std::to_string(k) + ")");
  };

  std::optional<detail::SizePacking> guard;
  if (options.max_cluster_size) {
    guard.emplace(n, k, cap);
    if (guard->trivial()) guard.reset();
  }
  auto guarded = [&](std::size_t a, std::size_t b) -> std::pair<std::size_t, std::size_t> {
    if (!guard || guard->admit(state, a, b)) return {a, b};
    return best_admissible(state, key, *guard);
  };

  if (options.scan == ScanStrategy::row_cache) {
    detail::RowMinCache cache(state.active_flags(), key);
    while (state.n_active() > k) {
      const auto pair = cache.best_pair();
      if (!pair) throw infeasible();
      const auto [a, b] = guarded(pair->first, pair->second);
      record(a, b);
      cache.after_merge(a, b);
    }
  } else {
    while (state.n_active() > k) {
      double best = kInf;
      std::size_t best_a = detail::kNoPartner, best_b = detail::kNoPartner;
      for (std::size_t a = 0; a < n; ++a) {
        if (!state.active(a)) continue;
        for (std::size_t b = a + 1; b < n; ++b) {
          if (!state.active(b)) continue;
          const double v = key(a, b);
          if (v < best) {
            best = v;
            best_a = a;
            best_b = b;
          }
        }
      }
      if (best_a == detail::kNoPartner) throw infeasible();
      const auto [a, b] = guarded(best_a, best_b);
      record(a, b);
    }
  }

  auto assignment = cut_trace(trace, n, k);
  return {std::move(assignment), std::move(trace)};
}

}  // namespace cbprior
