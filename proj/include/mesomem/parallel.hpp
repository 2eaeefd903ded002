#pragma once

// Block-parallel reductions with a fixed block decomposition.
//
// Partial sums are always formed per block of kBlock items and combined in
// block order, so results are bit-identical regardless of the thread count.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace mesomem {

struct ExecPolicy {
    unsigned threads = 1;
    /// Forces a single thread; reductions are ordered in either case.
    bool deterministic = false;

    unsigned effective_threads() const noexcept {
        return deterministic ? 1u : std::max(1u, threads);
    }
};

/// Thread count from MESOMEM_THREADS, else hardware concurrency.
inline unsigned default_thread_count() {
    if (const char* env = std::getenv("MESOMEM_THREADS")) {
        try {
            int v = std::stoi(env);
            if (v > 0) return static_cast<unsigned>(v);
        } catch (...) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

inline ExecPolicy& default_policy() {
    static ExecPolicy policy{default_thread_count(), false};
    return policy;
}

inline constexpr std::size_t kBlock = 8192;
// Below this many items threads are not worth spawning.
inline constexpr std::size_t kParallelThreshold = 1u << 16;

/// Runs body(begin, end) over [0, n) split into fixed blocks.
template <class Body>
void parallel_blocks(std::size_t n, const ExecPolicy& policy, Body&& body) {
    const std::size_t nblocks = (n + kBlock - 1) / kBlock;
    const unsigned nthreads =
        n < kParallelThreshold ? 1u : std::min<unsigned>(policy.effective_threads(),
                                                         static_cast<unsigned>(nblocks));
    if (nthreads <= 1) {
        for (std::size_t b = 0; b < nblocks; ++b)
            body(b * kBlock, std::min(n, (b + 1) * kBlock));
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t b = next++; b < nblocks; b = next++)
            body(b * kBlock, std::min(n, (b + 1) * kBlock));
    };
    std::vector<std::thread> pool;
    pool.reserve(nthreads - 1);
    for (unsigned t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
}

/// Sum of f(i) over [0, n), reduced per block in fixed order.
template <class F>
double block_sum(std::size_t n, const ExecPolicy& policy, F&& f) {
    const std::size_t nblocks = (n + kBlock - 1) / kBlock;
    std::vector<double> partial(nblocks, 0.0);
    parallel_blocks(n, policy, [&](std::size_t begin, std::size_t end) {
        double s = 0.0;
        for (std::size_t i = begin; i < end; ++i) s += f(i);
        partial[begin / kBlock] = s;
    });
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

}  // namespace mesomem
