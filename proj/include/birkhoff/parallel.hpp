#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace birkhoff {

// Splits [0, n) into contiguous chunks processed by up to `workers` threads.
// body(begin, end) must only write to state owned by its chunk. The first
// exception thrown by any chunk is rethrown on the calling thread.
template <class Body>
void parallel_for(std::size_t n, std::size_t workers, Body&& body) {
    workers = std::max<std::size_t>(1, std::min(workers, n));
    if (workers == 1) {
        if (n > 0) body(std::size_t{0}, n);
        return;
    }
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk, end = std::min(n, begin + chunk);
        if (begin >= end) break;
        threads.emplace_back([&, w, begin, end] {
            try {
                body(begin, end);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace birkhoff
