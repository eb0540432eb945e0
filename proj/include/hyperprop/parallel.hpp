#pragma once

#include <cstddef>
#include <functional>

namespace hyperprop {

/// Worker count: HYPERPROP_THREADS if set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
unsigned thread_count();

/// Run body(i) for i in [0, n). Iterations are split into contiguous chunks
/// over thread_count() workers; each index is visited exactly once, so
/// bodies that write only to slot i give results independent of the split.
/// The first exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace hyperprop
