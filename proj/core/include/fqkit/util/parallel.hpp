#pragma once

#include <cstddef>
#include <functional>

namespace fqkit {

// Worker cap from FQKIT_THREADS (0 or unset = hardware concurrency).
std::size_t thread_limit();

// Runs body(begin, end) over [0, n) split into contiguous chunks. Chunks are
// disjoint so any body that writes only its own slots is deterministic.
void parallel_for(std::size_t n, std::size_t min_chunk,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace fqkit
