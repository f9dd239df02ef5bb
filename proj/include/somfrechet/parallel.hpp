#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace somfrechet {

/// splitmix64 finalizer. Used to derive independent child seeds from a base
/// seed and a sequence of indices so results never depend on scheduling.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a) noexcept
{
    return mix_seed(mix_seed(base) ^ a);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) noexcept
{
    return derive_seed(derive_seed(base, a), b);
}

/// Worker count from SOMFRECHET_WORKERS, falling back to hardware concurrency.
std::size_t default_workers();

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Each index is
/// processed exactly once; callers write into per-index slots so the output is
/// independent of the worker count. The first exception thrown is rethrown.
template <class Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn)
{
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t count = workers < n ? workers : n;
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(count);
    for (std::size_t w = 0; w < count; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += count) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace somfrechet
