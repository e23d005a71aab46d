#pragma once

#include <cstddef>
#include <functional>

namespace bavc {

/// Number of worker threads used by parallel_for. 0 selects hardware concurrency.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Runs body(i) for i in [0, n). Results must be written to per-index slots so
/// that any later reduction happens in a fixed order.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace bavc
