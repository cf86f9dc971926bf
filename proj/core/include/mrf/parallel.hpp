#pragma once

#include <cstddef>
#include <functional>

namespace mrf {

// Worker cap: MRF_THREADS if set to a positive integer, else hardware concurrency.
std::size_t worker_count();

// Splits [0, n) into contiguous chunks and runs body(begin, end) on up to
// worker_count() threads. Chunk boundaries depend only on n and the worker
// count, so any per-index work is reproducible.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

} // namespace mrf
