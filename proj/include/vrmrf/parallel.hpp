#pragma once

// Minimal worker pool used by estimate_all / associate_all / the
// consistency experiment. Tasks are indexed; workers pull indices from an
// atomic counter and write results to caller-owned slots, so the output is
// identical for any thread count.

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace vrmrf {

inline unsigned default_thread_count() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

// Runs fn(task_index, worker_index) for task_index in [0, n_tasks).
template <typename Fn>
void parallel_for(std::size_t n_tasks, unsigned n_threads, Fn&& fn) {
    if (n_threads == 0) n_threads = 1;
    if (n_threads == 1 || n_tasks <= 1) {
        for (std::size_t i = 0; i < n_tasks; ++i) fn(i, 0u);
        return;
    }
    if (n_threads > n_tasks) n_threads = static_cast<unsigned>(n_tasks);

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&](unsigned worker_index) {
        for (;;) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n_tasks) return;
            try {
                fn(i, worker_index);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(n_tasks, std::memory_order_relaxed);
                return;
            }
        }
    };

    std::vector<std::thread> threads;
    threads.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) threads.emplace_back(worker, t);
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace vrmrf
