// Order-preserving parallel map over independent work items.

#ifndef MH4_PARALLEL_HPP_
#define MH4_PARALLEL_HPP_

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mh4 {

inline unsigned default_jobs() { return std::max(1U, std::thread::hardware_concurrency()); }

/// out[i] = f(i) for i in [0, count). The first exception thrown by any
/// worker is rethrown after all workers stop.
template <typename R, typename F>
std::vector<R> parallel_map(std::size_t count, unsigned jobs, F&& f) {
  std::vector<R> out(count);
  jobs = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = f(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        out[i] = f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace mh4

#endif  // MH4_PARALLEL_HPP_
