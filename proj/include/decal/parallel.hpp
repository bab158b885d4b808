#pragma once

#include <cstddef>
#include <functional>

namespace decal {

/// Worker cap from DECAL_THREADS, else the number of processors (at least 1).
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. If any call
/// throws, the exception from the lowest failing index is rethrown after all
/// workers finish. Results must be written to per-index slots by the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace decal
