#pragma once

#include <cstdint>
#include <vector>

#include "cbprior/dcpe.hpp"

namespace cbprior::detail {

// Keeps a capped merge from painting itself into a corner. Plain greedy
// merging under a size cap can strand, for example three clusters of 2 with
// cap 3 and k = 2. A merge is admitted only if the resulting cluster sizes can
// still be packed into k bins of capacity `cap`; any such packing is a recipe
// for reaching k clusters. A witness packing of the live clusters is kept so
// that some admissible merge (two clusters sharing a bin) always exists.
//
// Every merge made by a greedy run that does reach k clusters is admissible,
// so the guard only changes runs that would otherwise fail.
class SizePacking {
 public:
  SizePacking(std::size_t n_slots, std::size_t k, std::size_t cap);

  // When 2N <= k * cap, next-fit packs any cap-respecting sizes into k bins,
  // so every cap-respecting merge is admissible.
  bool trivial() const { return trivial_; }

  // Whether merging b into a leaves a packable state. Adopts the packing
  // found, if any, as the new witness.
  bool admit(const DistanceState& state, std::size_t a, std::size_t b);

  bool same_bin(std::size_t a, std::size_t b) const { return bin_[a] == bin_[b]; }

 private:
  bool repair(const DistanceState& state, std::size_t a, std::size_t b);
  bool search(const DistanceState& state, std::size_t a, std::size_t b);
  void move(std::size_t slot, std::size_t size, std::size_t to);

  std::size_t k_;
  std::size_t cap_;
  bool trivial_;
  std::vector<std::size_t> bin_;   // witness bin per slot
  std::vector<std::size_t> load_;  // witness load per bin
  std::vector<std::vector<std::size_t>> members_;  // slots per bin; may hold dead slots
};

}  // namespace cbprior::detail
