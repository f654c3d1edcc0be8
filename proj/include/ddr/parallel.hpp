#pragma once

#include <functional>

namespace ddr {

// set_thread_count(n > 0) if called, else DDR_THREADS if set, else hardware concurrency.
int thread_count();
// 0 restores the default
void set_thread_count(int n);

// Runs f(0..n-1) on up to thread_count() threads. Each index must write only
// its own output slot; the first exception is rethrown.
void parallel_for(int n, const std::function<void(int)>& f);

} // namespace ddr
