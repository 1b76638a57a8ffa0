#pragma once

#include <cstddef>
#include <functional>

namespace forcefit {

/// Worker count: FORCEFIT_THREADS if set to a positive integer, otherwise the
/// hardware concurrency.
int threadCount();

/// Runs fn(i) for i in [0, n). Each index must write only its own output
/// slot; results are then independent of the thread count.
void parallelFor(std::size_t n, const std::function<void(std::size_t)>& fn, int threads = 0);

}  // namespace forcefit
