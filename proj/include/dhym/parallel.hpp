#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace dhym {

namespace detail {
inline std::atomic<int>& thread_override() {
    static std::atomic<int> value{0};
    return value;
}
}  // namespace detail

/// Worker count: explicit override, else DHYM_THREADS, else hardware concurrency.
inline int worker_count() {
    if (int forced = detail::thread_override().load(); forced > 0) return forced;
    if (const char* env = std::getenv("DHYM_THREADS"); env != nullptr && *env != '\0') {
        try {
            int v = std::stoi(env);
            if (v > 0) return v;
        } catch (...) {
        }
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Overrides the worker count for this process; 0 restores the default lookup.
inline void set_worker_count(int count) { detail::thread_override().store(std::max(0, count)); }

/// Runs body(begin, end) over a static partition of [0, count). Each index is
/// owned by exactly one worker, so per-index writes never race and results do
/// not depend on the partition.
template <class Body>
void parallel_for(std::size_t count, Body&& body, std::size_t min_chunk = 2048) {
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(worker_count()), (count + min_chunk - 1) / min_chunk);
    if (workers <= 1) {
        body(std::size_t{0}, count);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto run = [&](std::size_t w) {
        std::size_t begin = count * w / workers;
        std::size_t end = count * (w + 1) / workers;
        try {
            body(begin, end);
        } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
        }
    };
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run, w);
    run(0);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

/// Pairwise (tree) summation in a fixed order.
inline double pairwise_sum(std::span<const double> values) {
    constexpr std::size_t kLeaf = 16;
    if (values.size() <= kLeaf) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace dhym
