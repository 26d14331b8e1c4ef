#pragma once

#include <cstddef>
#include <functional>

namespace cbprior {

// Number of worker threads used by internal parallel loops. Resolution order:
// explicit set_thread_count(), then CODEBOOK_PRIOR_THREADS, then hardware
// concurrency.
std::size_t thread_count();
void set_thread_count(std::size_t n);  // 0 restores the default resolution

// Runs body(begin, end) over contiguous chunks of [0, n). Chunks are disjoint;
// the body must only write state owned by its chunk.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk = 64);

}  // namespace cbprior
