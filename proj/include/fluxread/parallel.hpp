#pragma once

#include <cstddef>
#include <functional>

namespace fluxread {

/// Worker count for grid scans and sweeps. Reads FLUXREAD_WORKERS, falling
/// back to the hardware concurrency. Always at least 1.
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Each index is
/// visited exactly once, so writing results into a preallocated slot per index
/// keeps output ordering deterministic. The exception from the lowest failing
/// index is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace fluxread
