#pragma once

#include <cstddef>
#include <functional>

namespace levylab {

// Worker count: explicit value if > 0, else LEVYLAB_WORKERS, else hardware concurrency.
int resolve_workers(int requested);

// Runs fn(i) for i in [0, n) on up to `workers` threads. Each index is processed
// exactly once; results must be written to per-index slots by the caller.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace levylab
