#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cdl
{

inline unsigned resolve_threads(unsigned requested)
{
    if (requested > 0)
        return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

// Calls fn(i) for i in [0, n) on up to `threads` workers pulling indices from
// a shared counter. Callers write results into per-index slots, so the merge
// order (and hence every reduction) is independent of scheduling. The first
// exception thrown by any fn is rethrown after all workers stop.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn)
{
    threads = std::min<std::size_t>(resolve_threads(threads), n);
    if (threads <= 1)
    {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;)
        {
            try
            {
                fn(i);
            }
            catch (...)
            {
                std::lock_guard lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                next = n;
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t)
        pool.emplace_back(work);
    work();
    for (auto& th : pool)
        th.join();
    if (error)
        std::rethrow_exception(error);
}

} // namespace cdl
