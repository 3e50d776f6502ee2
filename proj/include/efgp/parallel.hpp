#pragma once

#include <cstddef>
#include <functional>

namespace efgp {

/// Worker count: hardware concurrency, capped by the EFGP_THREADS environment variable.
[[nodiscard]] int worker_count();

/// Splits [0, count) into contiguous chunks, one per worker, and runs body(begin, end) on each.
/// The partition depends only on count and the worker count, so per-index results are
/// independent of scheduling.  The first exception thrown by a chunk is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk = 1);

}  // namespace efgp
