#pragma once

#include <cstddef>
#include <functional>

namespace bhlr {

// Number of worker threads used by parallel_for (default 1).
void set_worker_count(int n);
int worker_count();

// Calls f(k) for k in [0, n). Each index is handled by exactly one worker and
// callers write results into per-index slots, so output does not depend on
// the worker count. The first exception (lowest index) is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f);

}  // namespace bhlr
