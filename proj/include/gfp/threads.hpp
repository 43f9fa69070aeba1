#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <thread>
#include <utility>
#include <vector>

namespace gfp {

// process-wide override (from --threads); 0 means "use env / hardware"
inline std::atomic<int>& thread_override() {
    static std::atomic<int> v{0};
    return v;
}

inline int thread_count() {
    int ov = thread_override().load(std::memory_order_relaxed);
    if (ov >= 1) return ov;
    if (const char* env = std::getenv("GFPERC_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end && *end == '\0' && v >= 1 && v <= 4096) return static_cast<int>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

// Runs fn(i) for i in [0, n), split into one contiguous block per worker.
// fn must only write to per-index slots, so results do not depend on the
// worker count or schedule.
template <class Fn>
void parallel_for(long n, Fn&& fn, int threads = 0) {
    if (n <= 0) return;
    long t = threads >= 1 ? threads : thread_count();
    if (t > n) t = n;
    if (t == 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errs(static_cast<std::size_t>(t));
    auto run = [&](long id) {
        long lo = n * id / t, hi = n * (id + 1) / t;
        try {
            for (long i = lo; i < hi; ++i) fn(i);
        } catch (...) {
            errs[static_cast<std::size_t>(id)] = std::current_exception();
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(t - 1));
    for (long id = 1; id < t; ++id) pool.emplace_back(run, id);
    run(0);
    for (auto& th : pool) th.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

// Deterministic parallel reduction: trials are grouped into fixed contiguous
// blocks, each block accumulates sequentially, and block results are combined
// in block order. The outcome is identical for every worker count.
template <class Acc, class Make, class Step, class Merge>
Acc reduce_blocks(long n, long block, Make make, Step step, Merge merge) {
    if (block < 1) block = 1;
    long nb = (n + block - 1) / block;
    if (nb <= 0) return make();
    std::vector<Acc> parts;
    parts.reserve(static_cast<std::size_t>(nb));
    for (long b = 0; b < nb; ++b) parts.push_back(make());
    parallel_for(nb, [&](long b) {
        long lo = b * block, hi = std::min(n, lo + block);
        for (long i = lo; i < hi; ++i) step(parts[static_cast<std::size_t>(b)], i);
    });
    Acc total = make();
    for (long b = 0; b < nb; ++b) merge(total, std::move(parts[static_cast<std::size_t>(b)]));
    return total;
}

} // namespace gfp
