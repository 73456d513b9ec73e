#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mcurve {

/// Runs f(i) for i in [0, n) on `threads` workers using static contiguous
/// blocks. Callers write results into slot i, so the outcome never depends on
/// the thread count. The first exception thrown by any worker is rethrown.
template <class F>
void parallel_for(std::size_t n, int threads, F&& f)
{
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex mu;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = n * w / workers, hi = n * (w + 1) / workers;
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

/// Pairwise (cascade) summation with a fixed tree shape determined only by the
/// length of the input.
template <class T>
T pairwise_sum(const T* data, std::size_t n)
{
    if (n <= 8) {
        T s{};
        for (std::size_t i = 0; i < n; ++i) s += data[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

template <class T>
T pairwise_sum(const std::vector<T>& v)
{
    return pairwise_sum(v.data(), v.size());
}

} // namespace mcurve
