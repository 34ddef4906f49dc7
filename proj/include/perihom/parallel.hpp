#pragma once

#include <cstddef>
#include <functional>

namespace perihom {

/// Thread count from an explicit request, else PERIHOM_THREADS, else the
/// number of hardware threads (at least 1).
int resolve_threads(int requested);

/// Calls body(i) for i in [0, count) on up to `threads` worker threads.
/// Indices are handed out in fixed contiguous blocks, so any per-index output
/// is independent of scheduling. The first exception thrown by a body is
/// rethrown after all workers finish.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

}  // namespace perihom
