// SPDX-License-Identifier: Apache-2.0
//
// Replicate-level parallelism.  Worker count is capped by SPECCOH_THREADS;
// results must not depend on it, so tasks write to preassigned slots and any
// reduction happens afterwards in index order.

#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace speccoh {

inline int worker_count(int njobs) {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw < 1) hw = 1;
    if (const char* env = std::getenv("SPECCOH_THREADS")) {
        try {
            const int cap = std::stoi(env);
            if (cap >= 1) hw = std::min(hw, cap);
        } catch (...) {
            // ignore unparsable values
        }
    }
    return std::min(hw, njobs < 1 ? 1 : njobs);
}

/// Run fn(0..n-1), possibly concurrently.  fn must only touch state owned by
/// its own index.  The first exception, if any, is rethrown.
inline void parallel_for(int n, const std::function<void(int)>& fn) {
    const int workers = worker_count(n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mtx;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mtx);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace speccoh
