#include "hpt/util.hpp"

#include <atomic>
#include <mutex>
#include <cstdlib>
#include <thread>

namespace hpt {

unsigned hardware_threads() {
    if (const char* env = std::getenv("HPT_THREADS")) {
        long k = std::atol(env);
        if (k > 0) return static_cast<unsigned>(k);
    }
    unsigned h = std::thread::hardware_concurrency();
    return h ? h : 1;
}

void parallel_for(size_t n, const std::function<void(size_t)>& fn, unsigned threads) {
    if (threads == 0) threads = hardware_threads();
    if (threads <= 1 || n <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                next.store(n);  // drain remaining work
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    unsigned k = static_cast<unsigned>(std::min<size_t>(threads, n));
    pool.reserve(k - 1);
    for (unsigned t = 1; t < k; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace hpt
