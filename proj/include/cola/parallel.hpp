#pragma once

#include <cstddef>
#include <functional>

namespace cola {

// Worker cap: COLA_THREADS when set to a positive integer, otherwise the
// hardware concurrency (at least 1).
std::size_t thread_budget();

// Runs fn(i) for i in [0, n) on up to thread_budget() threads. fn must only
// write to state owned by index i. The first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)> & fn);

} // namespace cola
