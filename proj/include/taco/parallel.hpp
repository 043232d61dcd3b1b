#pragma once

#include <cstddef>
#include <functional>

namespace taco {

// Worker cap: TACO_THREADS env var if set, else hardware concurrency, min 1.
unsigned worker_count();

// Runs fn over contiguous sub-ranges of [begin, end). Caller guarantees the
// ranges touch disjoint state; results must not depend on the split.
void parallel_for(size_t begin, size_t end,
                  const std::function<void(size_t, size_t)>& fn,
                  unsigned threads = 0);

}  // namespace taco
