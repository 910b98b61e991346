#pragma once

#include <cstddef>
#include <functional>
#include <string>

namespace vfuse {

/// Worker count used by all data-parallel kernels. 0 selects hardware concurrency.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Runs body(i) for i in [begin, end) split into contiguous static chunks.
/// Every kernel built on this writes disjoint outputs, so results do not depend
/// on the thread count.
void parallel_for(std::size_t begin, std::size_t end, const std::function<void(std::size_t)>& body);

/// Chunked variant: body(lo, hi) receives a half-open range.
void parallel_ranges(std::size_t begin, std::size_t end,
                     const std::function<void(std::size_t, std::size_t)>& body);

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

void set_log_level(LogLevel level);
void log(LogLevel level, const std::string& msg);
inline void log_info(const std::string& msg) { log(LogLevel::info, msg); }
inline void log_warn(const std::string& msg) { log(LogLevel::warn, msg); }

}  // namespace vfuse
