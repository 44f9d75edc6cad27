#pragma once

#include <cstddef>
#include <functional>

namespace dtopo {

// 0 means all available cores.
void set_thread_count(int n);
int thread_count();

// Runs body(i) for i in [0, n). Callers write results by index, so output order never
// depends on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace dtopo
