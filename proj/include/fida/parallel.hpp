#pragma once

#include <cstddef>
#include <functional>

namespace fida {

/// Worker count: FIDA_THREADS if set, else std::thread::hardware_concurrency().
std::size_t worker_count();

/// Runs body(i) for i in [0, n) across worker_count() threads. Each index is
/// executed exactly once; callers write results into per-index slots so the
/// outcome does not depend on scheduling. The first exception is rethrown
/// after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace fida
