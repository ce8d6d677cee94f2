#pragma once

#include <cstddef>
#include <functional>

namespace gaitvib {

/// Number of workers used by parallel_for. Defaults to the hardware
/// concurrency; GAITVIB_THREADS overrides it.
std::size_t worker_count();

/// Runs fn(i) for i in [0, n) over contiguous static chunks. Results must be
/// written to per-index slots; reductions happen afterwards in index order so
/// the outcome does not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace gaitvib
