#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace fcar::parallel {

inline int& thread_count_ref() {
    static int n = 1;
    return n;
}

/// 0 selects all hardware threads; the default is single-threaded.
inline void set_threads(int n) {
    if (n <= 0) {
        unsigned hw = std::thread::hardware_concurrency();
        thread_count_ref() = hw == 0 ? 1 : static_cast<int>(hw);
    } else {
        thread_count_ref() = n;
    }
}

inline int threads() { return thread_count_ref(); }

/// Static block partition of [begin, end). `f(i)` must be safe to run
/// concurrently for distinct i; results must not depend on the partition.
template <class F>
void parallel_for(int begin, int end, F&& f) {
    const int n = end - begin;
    const int nt = std::min(threads(), n);
    if (nt <= 1) {
        for (int i = begin; i < end; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nt));
    const int chunk = (n + nt - 1) / nt;
    for (int t = 0; t < nt; ++t) {
        const int lo = begin + t * chunk;
        const int hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &f] {
            for (int i = lo; i < hi; ++i) f(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace fcar::parallel
