#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace patentpipe::detail {

// Runs job(0..n) on up to `width` threads; inline when width <= 1. Jobs
// must only touch their own output slot.
template <class Fn>
void fan_out(std::size_t n, int width, Fn&& job) {
    if (width <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const auto threads = std::min<std::size_t>(static_cast<std::size_t>(width), n);
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < n;) job(i);
        });
    for (auto& th : pool) th.join();
}

}  // namespace patentpipe::detail
