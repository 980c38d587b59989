#ifndef KSLAB_PARALLEL_HPP
#define KSLAB_PARALLEL_HPP

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace kslab {

/// Runs fn(i) for i in [0, n) on a bounded worker pool. Each index owns
/// its output slot, so results are deterministic regardless of schedule.
/// jobs <= 0 selects the hardware concurrency.
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    unsigned workers = jobs > 0 ? static_cast<unsigned>(jobs)
                                : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) {
        pool.emplace_back([&]() {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace kslab

#endif
