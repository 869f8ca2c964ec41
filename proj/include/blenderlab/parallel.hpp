#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace blenderlab {

// Runs fn(i) for i in [0, n) on `threads` workers, contiguous chunks.
// Callers own result slots indexed by i, so output order is deterministic
// regardless of the thread count.
inline void parallel_for_index(long n, int threads, const std::function<void(long)>& fn) {
    if (n <= 0) return;
    int workers = std::max(1, threads);
    if (workers == 1 || n == 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    workers = static_cast<int>(std::min<long>(workers, n));
    std::vector<std::thread> pool;
    long chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        long lo = w * chunk;
        long hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (long i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace blenderlab
