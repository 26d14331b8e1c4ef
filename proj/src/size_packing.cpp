#include "size_packing.hpp"

#include <algorithm>
#include <iterator>
#include <map>
#include <unordered_set>
#include <utility>

namespace cbprior::detail {
namespace {

// Search budget in placements. Running out counts as "not packable", which
// is safe because the witness always offers a fallback merge.
constexpr std::size_t kPlacementBudget = std::size_t{1} << 22;

struct VectorHash {
  std::size_t operator()(const std::vector<std::size_t>& v) const {
    std::size_t h = v.size();
    for (std::size_t x : v) h ^= x + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

// Lower bound on the number of bins (Martello-Toth L2 and Fekete-Schepers), for item sizes given
// as (size, count) in decreasing size order.
std::size_t bin_lower_bound(const std::vector<std::pair<std::size_t, std::size_t>>& counts,
                            std::size_t cap) {
  std::size_t best = 0;
  auto bound_at = [&](std::size_t alpha) {
    std::size_t n_big = 0, n_mid = 0, sum_mid = 0, sum_small = 0;
    for (const auto& [size, count] : counts) {
      if (size > cap - alpha) {
        n_big += count;
      } else if (2 * size > cap) {
        n_mid += count;
        sum_mid += size * count;
      } else if (size >= alpha) {
        sum_small += size * count;
      }
    }
    const std::size_t room = n_mid * cap - sum_mid;
    const std::size_t spill = sum_small > room ? (sum_small - room + cap - 1) / cap : 0;
    return n_big + n_mid + spill;
  };
  best = bound_at(0);
  for (const auto& [size, count] : counts) {
    if (2 * size <= cap) best = std::max(best, bound_at(size));
  }
  // Fekete-Schepers dual feasible functions, scaled by q to stay integral:
  // an item counts as q * x when (q + 1) x is a multiple of cap, otherwise as
  // floor((q + 1) x / cap) * cap. Catches "at most q such items per bin".
  for (std::size_t q = 1; q <= std::min<std::size_t>(cap, 32); ++q) {
    std::size_t total = 0;
    for (const auto& [size, count] : counts) {
      const std::size_t scaled = (q + 1) * size;
      total += count * (scaled % cap == 0 ? q * size : scaled / cap * cap);
    }
    best = std::max(best, (total + q * cap - 1) / (q * cap));
  }
  return best;
}

}  // namespace

SizePacking::SizePacking(std::size_t n_slots, std::size_t k, std::size_t cap)
    : k_(k),
      cap_(cap),
      trivial_(2 * n_slots <= k * cap),
      bin_(n_slots),
      load_(k, 0),
      members_(k) {
  for (std::size_t s = 0; s < n_slots; ++s) {
    bin_[s] = s % k;
    ++load_[s % k];
    members_[s % k].push_back(s);
  }
}

bool SizePacking::admit(const DistanceState& state, std::size_t a, std::size_t b) {
  if (trivial_ || same_bin(a, b)) return true;
  return repair(state, a, b) || search(state, a, b);
}

void SizePacking::move(std::size_t slot, std::size_t size, std::size_t to) {
  auto& from = members_[bin_[slot]];
  from.erase(std::find(from.begin(), from.end(), slot));
  load_[bin_[slot]] -= size;
  load_[to] += size;
  members_[to].push_back(slot);
  bin_[slot] = to;
}

// Local fix-ups of the witness that put a and b in one bin: move one of them
// across, or move one across and send a single bin-mate the other way.
bool SizePacking::repair(const DistanceState& state, std::size_t a, std::size_t b) {
  for (auto [x, y] : {std::pair{a, b}, std::pair{b, a}}) {
    const std::size_t home = bin_[x], away = bin_[y], sy = state.size(y);
    if (load_[home] + sy <= cap_) {
      move(y, sy, home);
      return true;
    }
    auto& mates = members_[home];
    std::erase_if(mates, [&](std::size_t s) { return !state.active(s); });
    for (std::size_t z : mates) {
      if (z == x) continue;
      const std::size_t sz = state.size(z);
      if (load_[home] + sy - sz <= cap_ && load_[away] + sz - sy <= cap_) {
        move(z, sz, away);
        move(y, sy, home);
        return true;
      }
    }
  }
  return false;
}

// Depth-first packing of sizes in decreasing order. Bins are grouped by load,
// so bins with equal loads are never tried twice; the largest load that still
// fits is tried first, which makes the first descent best-fit decreasing.
// Failed (item, load histogram) states are remembered once backtracking starts.
bool SizePacking::search(const DistanceState& state, std::size_t a, std::size_t b) {
  std::map<std::size_t, std::vector<std::size_t>, std::greater<>> slots_by_size;
  for (std::size_t s = 0; s < state.capacity(); ++s) {
    if (!state.active(s) || s == b) continue;
    const std::size_t size = s == a ? state.size(a) + state.size(b) : state.size(s);
    slots_by_size[size].push_back(s);
  }
  std::vector<std::size_t> items;
  std::vector<std::pair<std::size_t, std::size_t>> counts;
  for (const auto& [size, slots] : slots_by_size) {
    items.insert(items.end(), slots.size(), size);
    counts.emplace_back(size, slots.size());
  }
  if (bin_lower_bound(counts, cap_) > k_) return false;

  std::map<std::size_t, std::vector<std::size_t>> bins_by_load;
  auto& empty = bins_by_load[0];
  for (std::size_t bin = k_; bin-- > 0;) empty.push_back(bin);

  const std::size_t m = items.size();
  std::vector<std::size_t> level(m), chosen_bin(m), limit(m + 1);
  std::unordered_set<std::vector<std::size_t>, VectorHash> failed;
  bool backtracked = false;
  std::size_t placements = 0;

  auto histogram_key = [&](std::size_t i) {
    std::vector<std::size_t> key{i};
    for (const auto& [load, bins] : bins_by_load) {
      if (bins.empty()) continue;
      key.push_back(load);
      key.push_back(bins.size());
    }
    return key;
  };
  auto unplace = [&](std::size_t i) {
    auto& from = bins_by_load[level[i] + items[i]];
    const std::size_t bin = from.back();
    from.pop_back();
    bins_by_load[level[i]].push_back(bin);
  };

  std::size_t i = 0;
  bool fresh = true;  // entering item i for the first time
  if (m > 0) limit[0] = cap_ - items[0];
  while (i < m) {
    const bool known_bad = fresh && backtracked && failed.count(histogram_key(i)) > 0;
    fresh = false;
    if (!known_bad) {
      // Largest non-empty load level <= limit[i].
      auto it = std::make_reverse_iterator(bins_by_load.upper_bound(limit[i]));
      while (it != bins_by_load.rend() && it->second.empty()) ++it;
      if (it != bins_by_load.rend()) {
        if (++placements > kPlacementBudget) return false;
        const std::size_t load = it->first;
        const std::size_t bin = it->second.back();
        it->second.pop_back();
        bins_by_load[load + items[i]].push_back(bin);
        level[i] = load;
        chosen_bin[i] = bin;
        ++i;
        if (i < m) limit[i] = cap_ - items[i];
        fresh = true;
        continue;
      }
    }
    // Every option for item i under the current prefix is exhausted.
    backtracked = true;
    failed.insert(histogram_key(i));
    for (;;) {
      if (i == 0) return false;
      --i;
      unplace(i);
      if (level[i] > 0) {
        limit[i] = level[i] - 1;
        break;
      }
      failed.insert(histogram_key(i));
    }
  }

  std::size_t next = 0;
  std::fill(load_.begin(), load_.end(), 0);
  for (auto& mates : members_) mates.clear();
  for (const auto& [size, slots] : slots_by_size) {
    for (std::size_t s : slots) {
      bin_[s] = chosen_bin[next++];
      load_[bin_[s]] += size;
      members_[bin_[s]].push_back(s);
    }
  }
  // b now lives inside a; keep it on a's bin so same_bin(a, b) holds.
  bin_[b] = bin_[a];
  members_[bin_[a]].push_back(b);
  return true;
}

}  // namespace cbprior::detail
