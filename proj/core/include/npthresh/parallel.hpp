#pragma once

#include <functional>

namespace npthresh::parallel {

int hardware_threads();

// Process-wide worker count used by the library; 0 resets to hardware.
void set_thread_count(int threads);
int thread_count();

// Runs fn(i) for i in [0, n). Each index must write only to its own output
// slot; under that contract the result is identical for every thread count.
void for_each_index(int n, const std::function<void(int)>& fn);

}  // namespace npthresh::parallel
