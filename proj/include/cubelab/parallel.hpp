#pragma once

#include <cstddef>
#include <functional>

namespace cubelab {

/// Worker cap from CUBELAB_THREADS (default 1, invalid values fall back to 1).
std::size_t worker_count();

/// Run fn(i) for i in [0, n) on up to worker_count() threads. Each index is
/// handled exactly once; callers write results into per-index slots and
/// reduce them in index order, so results do not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace cubelab
