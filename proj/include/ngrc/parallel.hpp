#pragma once

#include <cstddef>
#include <functional>

namespace ngrc {

/// Runs fn(0..n-1) over `threads` workers with a static block partition.
/// Item order within a worker is ascending; results must be written to
/// per-index slots so the outcome is independent of the thread count.
/// threads <= 1 (or n < 2) runs serially. The first exception thrown by any
/// item is rethrown after all workers joined.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace ngrc
