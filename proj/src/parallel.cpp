#include "taco/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace taco {

unsigned worker_count() {
    if (const char* env = std::getenv("TACO_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) return static_cast<unsigned>(std::min(v, 256l));
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1u;
}

void parallel_for(size_t begin, size_t end,
                  const std::function<void(size_t, size_t)>& fn,
                  unsigned threads) {
    if (begin >= end) return;
    if (threads == 0) threads = worker_count();
    size_t n = end - begin;
    threads = static_cast<unsigned>(std::min<size_t>(threads, n));
    if (threads <= 1 || n < 2) {
        fn(begin, end);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    size_t chunk = n / threads, extra = n % threads;
    size_t at = begin;
    for (unsigned t = 0; t < threads; ++t) {
        size_t len = chunk + (t < extra ? 1 : 0);
        pool.emplace_back(fn, at, at + len);
        at += len;
    }
    for (auto& th : pool) th.join();
}

}  // namespace taco
