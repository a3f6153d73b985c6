#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace sspectra {

/// Worker count for within-stage loops, read from SSPECTRA_THREADS (default 1).
inline unsigned thread_count() {
    const char* env = std::getenv("SSPECTRA_THREADS");
    if (env == nullptr) return 1;
    try {
        int n = std::stoi(env);
        return n > 0 ? static_cast<unsigned>(n) : 1U;
    } catch (...) {
        return 1;
    }
}

/// Runs body(i) for i in [0, n) over contiguous chunks. Bodies must write disjoint outputs.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
    unsigned workers = std::min<std::size_t>(thread_count(), std::max<std::size_t>(n, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::exception_ptr first_error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        std::size_t chunk = (n + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back([lo, hi, &body, &first_error, &error_mutex] {
                try {
                    for (std::size_t i = lo; i < hi; ++i) body(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            });
        }
    }
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace sspectra
