#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace capmeas {

/// Worker count used by the estimators. 0 or 1 runs inline.
void set_thread_count(unsigned threads) noexcept;
unsigned thread_count() noexcept;

/// Runs body(i) for i in [0, count) over a fixed contiguous partition.
/// Each index is computed by exactly one worker and results are written to
/// caller-owned slots, so reductions done afterwards in index order are
/// independent of the worker count.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
    const unsigned workers = std::min<std::size_t>(std::max(1u, thread_count()), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (count + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(count, lo + chunk);
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace capmeas
