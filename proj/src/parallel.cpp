#include "dtopo/parallel.hpp"

#include <atomic>
#include <exception>
#include <mutex>

#include <tbb/blocked_range.h>
#include <tbb/info.h>
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

namespace dtopo {

namespace {
std::atomic<int> g_threads{0};
}

void set_thread_count(int n) { g_threads = n < 0 ? 0 : n; }

int thread_count() {
  int n = g_threads.load();
  return n > 0 ? n : tbb::info::default_concurrency();
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  if (n == 0) return;
  if (thread_count() == 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  // first exception wins; TBB would otherwise pick an arbitrary one
  std::exception_ptr err;
  std::size_t err_index = n;
  std::mutex mu;
  tbb::task_arena arena(thread_count());
  arena.execute([&] {
    tbb::parallel_for(tbb::blocked_range<std::size_t>(0, n), [&](const tbb::blocked_range<std::size_t>& r) {
      for (std::size_t i = r.begin(); i != r.end(); ++i) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(mu);
          if (i < err_index) {
            err_index = i;
            err = std::current_exception();
          }
        }
      }
    });
  });
  if (err) std::rethrow_exception(err);
}

}  // namespace dtopo
