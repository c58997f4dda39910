#ifndef RIESZLAB_PARALLEL_HPP
#define RIESZLAB_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace rieszlab {

/// Thread count: RIESZLAB_THREADS env var, else hardware concurrency.
inline unsigned thread_count() {
    if (const char* env = std::getenv("RIESZLAB_THREADS")) {
        const long v = std::atol(env);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

/// Chunked parallel loop. Work is split into a fixed number of chunks
/// (independent of the thread count) and each chunk runs sequentially, so
/// any per-index output is bit-identical regardless of threading.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
    const unsigned threads = thread_count();
    if (threads <= 1 || count < 256) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    constexpr std::size_t kChunks = 64;
    const std::size_t chunk = (count + kChunks - 1) / kChunks;
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            const std::size_t begin = c * chunk;
            if (begin >= count) return;
            const std::size_t end = std::min(count, begin + chunk);
            for (std::size_t i = begin; i < end; ++i) fn(i);
        }
    };
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

} // namespace rieszlab

#endif
