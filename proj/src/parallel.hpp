#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

// Internal work-sharing helper for embarrassingly parallel cell loops.
// Results must be written to preassigned slots so output order never
// depends on scheduling; `fn` must not throw.
namespace fisim::detail {

inline unsigned effective_jobs(unsigned requested) {
    if (requested != 0) return requested;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc != 0 ? hc : 1;
}

inline void parallel_for(std::size_t count, unsigned jobs,
                         const std::function<void(std::size_t)>& fn) {
    const unsigned workers = std::min<std::size_t>(effective_jobs(jobs), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1))
                fn(i);
        });
    for (std::thread& t : pool) t.join();
}

} // namespace fisim::detail
