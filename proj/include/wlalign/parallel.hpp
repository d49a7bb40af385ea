#pragma once

#include <cstdint>
#include <thread>
#include <vector>

namespace wlalign {

// Thread cap for parallel sections. Default is 1 (fully sequential) so that
// runs are reproducible out of the box; WLALIGN_THREADS opts in to more.
int thread_cap();

// Runs f(begin, end) over contiguous chunks of [begin, end), possibly on
// several threads. Chunks partition the range, so per-index outputs are
// written by exactly one thread and the result is identical to the
// sequential execution regardless of the thread count.
template <typename F>
void parallel_for_chunks(std::int64_t begin, std::int64_t end, F&& f) {
    const std::int64_t span = end - begin;
    if (span <= 0) return;
    int threads = thread_cap();
    if (static_cast<std::int64_t>(threads) > span) threads = static_cast<int>(span);
    if (threads <= 1) {
        f(begin, end);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    const std::int64_t chunk = (span + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const std::int64_t lo = begin + chunk * t;
        const std::int64_t hi = lo + chunk < end ? lo + chunk : end;
        if (lo >= hi) break;
        pool.emplace_back([&f, lo, hi] { f(lo, hi); });
    }
    for (std::thread& th : pool) th.join();
}

}  // namespace wlalign
