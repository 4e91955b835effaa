#pragma once

#include <cstdint>
#include <functional>

namespace exactcoreset {

/// Caps the number of worker threads used by parallel_for. Values < 1 reset to
/// the hardware default.
void set_max_threads(int n);
int max_threads();

/// Runs fn(i) for i in [0, n). Work is split into contiguous chunks, one per
/// worker. fn must only write to per-index state; results are then independent
/// of the thread count.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn);

}  // namespace exactcoreset
