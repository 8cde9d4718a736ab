#pragma once

#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qdress {

/// Worker count for scan-level parallelism: QDRESS_WORKERS env var if set,
/// otherwise hardware concurrency.
inline unsigned worker_count() {
    if (const char* env = std::getenv("QDRESS_WORKERS")) {
        long n = std::strtol(env, nullptr, 10);
        if (n >= 1) return static_cast<unsigned>(n);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

namespace detail {
inline thread_local int parallel_depth = 0;
}

/// Runs f(i) for i in [0, n). Indices are partitioned statically across workers,
/// so results are deterministic as long as each index writes only its own slot.
/// Nested calls run serially to avoid oversubscription.
template <class F>
void parallel_for(std::size_t n, F&& f, unsigned workers = 0) {
    if (workers == 0) workers = worker_count();
    if (n == 0) return;
    if (workers <= 1 || n == 1 || detail::parallel_depth > 0) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    if (workers > n) workers = static_cast<unsigned>(n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr first_error;
    std::mutex err_mutex;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            detail::parallel_depth++;
            try {
                for (std::size_t i = w; i < n; i += workers) f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
            detail::parallel_depth--;
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace qdress
