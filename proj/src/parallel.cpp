#include "ctg/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ctg {

unsigned effective_thread_count(unsigned requested) {
    unsigned n = requested;
    if (n == 0) {
        n = std::thread::hardware_concurrency();
        if (const char* env = std::getenv("CTG_THREADS")) {
            long v = std::strtol(env, nullptr, 10);
            if (v >= 1) n = static_cast<unsigned>(v);
        }
    }
    return n == 0 ? 1 : n;
}

namespace {
// Nested calls (e.g. fitting forests inside a grid-search worker) run their
// inner loop serially instead of multiplying threads.
thread_local bool t_inside_parallel_for = false;
}  // namespace

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  unsigned threads) {
    if (n == 0) return;
    unsigned workers = effective_thread_count(threads);
    if (workers > n) workers = static_cast<unsigned>(n);
    if (workers <= 1 || t_inside_parallel_for) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&] {
        t_inside_parallel_for = true;
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed.store(true);
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace ctg
