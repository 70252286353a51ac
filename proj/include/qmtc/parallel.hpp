#pragma once
// parallel.hpp - index-parallel loop capped by the QMTC_THREADS environment variable

#include <cstddef>
#include <functional>

namespace qmtc {

// worker count: QMTC_THREADS when set to a positive integer, else hardware concurrency
unsigned thread_cap();

// runs fn(0..n-1); every index is independent, so results do not depend on the thread count
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace qmtc
