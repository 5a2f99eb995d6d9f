#include "phg/core.hpp"

#include <algorithm>
#include <atomic>

namespace phg {

namespace {
int g_threads = 0;  // 0 = uninitialized, resolve lazily
}

int thread_count() {
    if (g_threads <= 0) {
        unsigned hc = std::thread::hardware_concurrency();
        g_threads = hc == 0 ? 1 : static_cast<int>(hc);
    }
    return g_threads;
}

void set_thread_count(int n) { g_threads = std::max(1, n); }

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
    const int nt = std::min<std::size_t>(thread_count(), n == 0 ? 1 : n);
    if (nt <= 1 || n < 1024) {
        body(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nt);
    const std::size_t chunk = (n + nt - 1) / nt;
    for (int t = 0; t < nt; ++t) {
        std::size_t lo = std::min(n, t * chunk);
        std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&body, lo, hi] { body(lo, hi); });
    }
    for (auto& th : pool) th.join();
}

double parallel_sum(std::size_t n, const std::function<double(std::size_t)>& fn) {
    const int nt = std::min<std::size_t>(thread_count(), n == 0 ? 1 : n);
    const std::size_t chunk = (n + nt - 1) / nt;
    std::vector<double> partial(nt, 0.0);
    parallel_for(n, [&](std::size_t lo, std::size_t hi) {
        // Recover the chunk id from the range start; ranges are disjoint.
        std::size_t t = chunk == 0 ? 0 : lo / chunk;
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += fn(i);
        partial[std::min<std::size_t>(t, nt - 1)] += s;
    });
    double s = 0.0;
    for (double p : partial) s += p;  // fixed chunk order
    return s;
}

double parallel_max(std::size_t n, const std::function<double(std::size_t)>& fn) {
    const int nt = std::min<std::size_t>(thread_count(), n == 0 ? 1 : n);
    const std::size_t chunk = (n + nt - 1) / nt;
    std::vector<double> partial(nt, -1e300);
    parallel_for(n, [&](std::size_t lo, std::size_t hi) {
        std::size_t t = chunk == 0 ? 0 : lo / chunk;
        double s = -1e300;
        for (std::size_t i = lo; i < hi; ++i) s = std::max(s, fn(i));
        std::size_t slot = std::min<std::size_t>(t, nt - 1);
        partial[slot] = std::max(partial[slot], s);
    });
    double s = -1e300;
    for (double p : partial) s = std::max(s, p);
    return s;
}

}  // namespace phg
