#pragma once

#include <cstdint>
#include <functional>

namespace bandtaper {

/// Current worker count (>= 1). 0 was never stored; see set_thread_count.
int thread_count();

/// 0 selects the hardware concurrency; n >= 1 pins the count.
void set_thread_count(int n);

/**
 * Runs fn(i) for i in [0, n). Scheduling is dynamic, so fn must write only to
 * per-index slots; with that contract the outcome is identical for any thread
 * count. Nested calls execute inline on the calling thread. The first
 * exception thrown by any fn is rethrown after all workers join.
 */
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn);

}  // namespace bandtaper
