#pragma once

#include <cstddef>
#include <functional>

namespace spoofvqa {

// Worker cap: SPOOFVQA_THREADS when set, hardware concurrency otherwise.
std::size_t worker_cap();

// Runs fn(0..n-1) across up to worker_cap() threads. Each index runs
// exactly once; the first exception is rethrown after all workers join.
// Callers keep per-index state so results are order-independent.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace spoofvqa
