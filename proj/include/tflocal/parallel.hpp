#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace tflocal {

// Runs body(first, last) over disjoint chunks of [0, n). Chunk boundaries
// depend only on n and chunk_size, never on the thread count, so reductions
// that accumulate one partial per chunk and then combine partials in chunk
// order give bit-identical results on any machine.
template <typename Body>
void parallel_chunks(std::size_t n, std::size_t chunk_size, Body&& body) {
    if (n == 0) return;
    if (chunk_size == 0) chunk_size = 1;
    const std::size_t nchunks = (n + chunk_size - 1) / chunk_size;
    unsigned hw = std::thread::hardware_concurrency();
    if (hw <= 1 || nchunks <= 1) {
        for (std::size_t c = 0; c < nchunks; ++c)
            body(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
        return;
    }
    const unsigned nthreads = static_cast<unsigned>(std::min<std::size_t>(hw, nchunks));
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (unsigned t = 0; t < nthreads; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t c = t; c < nchunks; c += nthreads)
                body(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace tflocal
