#include "tomo/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace tomo {

namespace {

int default_threads() {
    if (const char* env = std::getenv("TOMOPRIOR_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

std::atomic<int> g_max_threads{0}; // 0 = unset, resolve lazily

} // namespace

void set_max_threads(int n) { g_max_threads.store(n > 0 ? n : 0); }

int max_threads() {
    int n = g_max_threads.load();
    return n > 0 ? n : default_threads();
}

void parallel_for_chunked(std::size_t n, std::size_t num_chunks,
                          const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    num_chunks = std::min(std::max<std::size_t>(num_chunks, 1), n);

    auto chunk_bounds = [&](std::size_t c) {
        std::size_t lo = c * n / num_chunks;
        std::size_t hi = (c + 1) * n / num_chunks;
        return std::pair<std::size_t, std::size_t>(lo, hi);
    };

    std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(max_threads()), num_chunks);
    if (workers <= 1) {
        for (std::size_t c = 0; c < num_chunks; ++c) {
            auto [lo, hi] = chunk_bounds(c);
            fn(lo, hi);
        }
        return;
    }

    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                std::size_t c = next.fetch_add(1);
                if (c >= num_chunks) break;
                auto [lo, hi] = chunk_bounds(c);
                fn(lo, hi);
            }
        });
    }
    for (auto& t : pool) t.join();
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    parallel_for_chunked(n, std::min<std::size_t>(n, 64), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
}

} // namespace tomo
