#ifndef SBMOM_PARALLEL_HPP
#define SBMOM_PARALLEL_HPP

#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace sbmom {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

// Static block partition of [0, count); each index is processed exactly
// once and results must be written to per-index slots, so the outcome is
// independent of the thread count. The first exception thrown by a
// worker is rethrown on the calling thread.
template <class Fn>
void parallel_for(std::int64_t count, int threads, Fn&& fn) {
    threads = resolve_threads(threads);
    if (threads <= 1 || count <= 1) {
        for (std::int64_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    const std::int64_t chunk = (count + threads - 1) / threads;
    std::vector<std::exception_ptr> errors(threads);
    for (int w = 0; w < threads; ++w) {
        const std::int64_t lo = w * chunk;
        const std::int64_t hi = std::min<std::int64_t>(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn, &errors, w] {
            try {
                for (std::int64_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace sbmom

#endif
