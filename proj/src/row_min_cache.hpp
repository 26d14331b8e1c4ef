#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace cbprior::detail {

inline constexpr std::size_t kNoPartner = std::numeric_limits<std::size_t>::max();

// Exact argmin over the upper triangle of a symmetric pair-key matrix, with
// the (key, a, b) lexicographic tie-break. Each live row a caches its best
// partner b > a. After a merge of b into a only row a, rows whose cached
// partner was a or b, and entries (c, a) can change, so only those are
// revisited. Worst case remains O(N^2) per merge; typical cost is O(N).
//
// KeyFn: double(std::size_t a, std::size_t b) for live a < b. Returns +inf
// for pairs that must not be merged.
template <class KeyFn>
class RowMinCache {
 public:
  RowMinCache(const std::vector<std::uint8_t>& active, KeyFn key)
      : active_(active),
        key_(std::move(key)),
        best_key_(active.size(), kInf),
        best_col_(active.size(), kNoPartner) {
    for (std::size_t a = 0; a < active_.size(); ++a) {
      if (active_[a]) refresh_row(a);
    }
  }

  // Lexicographically smallest (key, a, b) among live feasible pairs.
  std::optional<std::pair<std::size_t, std::size_t>> best_pair() const {
    double best = kInf;
    std::size_t row = kNoPartner;
    for (std::size_t a = 0; a < active_.size(); ++a) {
      if (active_[a] && best_col_[a] != kNoPartner && best_key_[a] < best) {
        best = best_key_[a];
        row = a;
      }
    }
    if (row == kNoPartner) return std::nullopt;
    return std::make_pair(row, best_col_[row]);
  }

  // Call after cluster b has been folded into a (a < b) and deactivated.
  void after_merge(std::size_t a, std::size_t b) {
    best_key_[b] = kInf;
    best_col_[b] = kNoPartner;
    refresh_row(a);
    for (std::size_t c = 0; c < a; ++c) {
      if (!active_[c]) continue;
      if (best_col_[c] == a || best_col_[c] == b) {
        refresh_row(c);
        continue;
      }
      const double v = key_(c, a);
      if (v < best_key_[c] || (v == best_key_[c] && v < kInf && a < best_col_[c])) {
        best_key_[c] = v;
        best_col_[c] = a;
      }
    }
    for (std::size_t c = a + 1; c < b; ++c) {
      if (active_[c] && best_col_[c] == b) refresh_row(c);
    }
  }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  void refresh_row(std::size_t a) {
    double best = kInf;
    std::size_t col = kNoPartner;
    for (std::size_t b = a + 1; b < active_.size(); ++b) {
      if (!active_[b]) continue;
      const double v = key_(a, b);
      if (v < best) {
        best = v;
        col = b;
      }
    }
    best_key_[a] = best;
    best_col_[a] = col;
  }

  const std::vector<std::uint8_t>& active_;
  KeyFn key_;
  std::vector<double> best_key_;
  std::vector<std::size_t> best_col_;
};

}  // namespace cbprior::detail
