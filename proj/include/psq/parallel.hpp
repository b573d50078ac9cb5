#pragma once

#include <cstddef>
#include <functional>

namespace psq {

// Worker count: PSQ_THREADS if set and positive, else hardware concurrency.
unsigned thread_count();

// Runs body(i) for i in [0, n) over contiguous static blocks, so the
// assignment of indices to threads depends only on n and thread_count().
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace psq
