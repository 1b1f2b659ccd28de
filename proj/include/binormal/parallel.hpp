#pragma once

#include <cstdlib>
#include <thread>
#include <vector>

namespace binormal {

// Thread cap: min(hardware, BINORMAL_LAB_THREADS).  Workers write results into
// preallocated slots indexed by i, so reductions stay ordered and output is
// deterministic regardless of the cap.
inline unsigned max_threads() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("BINORMAL_LAB_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1 && static_cast<unsigned>(v) < hw) hw = static_cast<unsigned>(v);
    }
    return hw;
}

template <class F>
void parallel_for(std::size_t n, F&& body) {
    unsigned nt = max_threads();
    if (nt <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    if (nt > n) nt = static_cast<unsigned>(n);
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (unsigned t = 0; t < nt; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += nt) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace binormal
