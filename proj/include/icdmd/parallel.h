#pragma once

#include <cstddef>
#include <functional>

namespace icdmd {

/// Worker count, capped by the ICDMD_THREADS environment variable when set.
int WorkerCount();

/// Splits [0, n) into contiguous chunks and runs `body(begin, end)` on each,
/// possibly concurrently. The first exception thrown by any chunk is
/// rethrown after all workers join.
void ParallelFor(std::ptrdiff_t n,
                 const std::function<void(std::ptrdiff_t, std::ptrdiff_t)>& body);

}  // namespace icdmd
