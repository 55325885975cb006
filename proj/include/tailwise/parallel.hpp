#pragma once

#include <cstddef>
#include <functional>

namespace tailwise {

/// Worker count: TAILWISE_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
std::size_t thread_count();

/// Runs body(i) for i in [0, n) on up to thread_count() threads. Work is
/// handed out in index order; callers write results into per-index slots so
/// the outcome never depends on scheduling. The first exception thrown by any
/// body is rethrown after all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace tailwise
