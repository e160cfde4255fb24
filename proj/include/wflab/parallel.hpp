#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace wflab {

//! Worker count: WFLAB_THREADS if set and positive, else hardware threads.
inline std::size_t worker_count()
{
    if (char const* env = std::getenv("WFLAB_THREADS"))
    {
        try
        {
            long n = std::stol(env);
            if (n > 0)
                return static_cast<std::size_t>(n);
        }
        catch (...)
        {
        }
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

//---------------------------------------------------------------------------//
/*!
 * Run body(i) for i in [0, n) on up to worker_count() threads.
 *
 * Work is split into contiguous blocks. Callers write results into
 * per-index slots and reduce afterwards in index order, so output does not
 * depend on the number of workers. The exception from the lowest failing
 * block is rethrown.
 */
template<class Body>
void parallel_for(std::size_t n, Body&& body, std::size_t workers = 0)
{
    if (workers == 0)
        workers = worker_count();
    workers = std::min(workers, n);
    if (workers <= 1)
    {
        for (std::size_t i = 0; i < n; ++i)
            body(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
    {
        std::size_t begin = n * w / workers;
        std::size_t end = n * (w + 1) / workers;
        threads.emplace_back([&, w, begin, end] {
            try
            {
                for (std::size_t i = begin; i < end; ++i)
                    body(i);
            }
            catch (...)
            {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : threads)
        t.join();
    for (auto& e : errors)
    {
        if (e)
            std::rethrow_exception(e);
    }
}

}  // namespace wflab
