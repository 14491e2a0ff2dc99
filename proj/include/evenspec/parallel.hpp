#pragma once

#include <cstddef>
#include <functional>

namespace evenspec {

/// Worker count: EVENSPEC_THREADS if set and positive, otherwise the
/// hardware concurrency (at least 1).
int thread_count();

/// Runs body(i) for i in [0, count).  Each index is handled exactly once;
/// callers write results into preallocated slots, so the output does not
/// depend on the number of threads.  The first exception thrown by any
/// body is rethrown after all workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

} // namespace evenspec
