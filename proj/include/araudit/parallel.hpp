#pragma once

#include <cstddef>
#include <functional>

namespace araudit {

/// Worker count from ARAUDIT_WORKERS, else hardware concurrency (at least 1).
std::size_t default_workers();

/// Runs body(i) for i in [0, count) on up to `workers` threads. Each index is
/// visited exactly once; callers write results into per-index slots so the
/// outcome never depends on scheduling. The first exception thrown by any
/// body is rethrown after all workers join.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& body);

} // namespace araudit
