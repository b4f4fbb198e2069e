#pragma once

#include <cstdint>
#include <functional>

namespace spikemon {

/// Worker count actually used when `threads` are requested (0 = all hardware
/// threads). Always >= 1.
int resolve_threads(int threads);

/// Run body(i) for i = 0 .. count-1, distributed over worker threads.
/// Callers must write results only into per-index slots so the outcome is
/// identical under any thread count or schedule. The first exception thrown
/// by any body is rethrown after all workers finish; remaining work is
/// abandoned.
void parallel_for(std::int64_t count, int threads,
                  const std::function<void(std::int64_t)>& body);

}  // namespace spikemon
