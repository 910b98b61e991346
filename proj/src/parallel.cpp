#include "vesselfuse/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <iostream>
#include <mutex>
#include <thread>
#include <vector>

namespace vfuse {

namespace {
std::atomic<unsigned> g_threads{0};
std::atomic<int> g_log_level{static_cast<int>(LogLevel::info)};
std::mutex g_log_mutex;
}  // namespace

void set_thread_count(unsigned n) { g_threads = n; }

unsigned thread_count() {
    unsigned n = g_threads.load();
    if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
    return n;
}

void parallel_ranges(std::size_t begin, std::size_t end,
                     const std::function<void(std::size_t, std::size_t)>& body) {
    if (end <= begin) return;
    const std::size_t total = end - begin;
    const std::size_t workers = std::min<std::size_t>(thread_count(), total);
    if (workers <= 1) {
        body(begin, end);
        return;
    }
    const std::size_t chunk = (total + workers - 1) / workers;
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = begin + w * chunk;
        const std::size_t hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            try {
                body(lo, hi);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

void parallel_for(std::size_t begin, std::size_t end, const std::function<void(std::size_t)>& body) {
    parallel_ranges(begin, end, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) body(i);
    });
}

void set_log_level(LogLevel level) { g_log_level = static_cast<int>(level); }

void log(LogLevel level, const std::string& msg) {
    if (static_cast<int>(level) < g_log_level.load()) return;
    static constexpr const char* tags[] = {"debug", "info", "warn", "error"};
    std::lock_guard<std::mutex> lock(g_log_mutex);
    std::cerr << "[vesselfuse " << tags[static_cast<int>(level)] << "] " << msg << '\n';
}

}  // namespace vfuse
