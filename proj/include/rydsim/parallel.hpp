#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace ryd {

inline int resolve_jobs(int n_jobs) {
    if (n_jobs > 0) return n_jobs;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Static block partition of [0, n). Workers write to disjoint slots only,
// so results do not depend on the worker count.
template <typename Fn>
void parallel_for(int n, int n_jobs, Fn&& fn) {
    int jobs = std::min(resolve_jobs(n_jobs), n);
    if (jobs <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    int chunk = (n + jobs - 1) / jobs;
    for (int w = 0; w < jobs; ++w) {
        int lo = w * chunk;
        int hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        workers.emplace_back([lo, hi, &fn] {
            for (int i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : workers) t.join();
}

}  // namespace ryd
