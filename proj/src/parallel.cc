#include "icdmd/parallel.h"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace icdmd {

int WorkerCount() {
  int n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("ICDMD_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap >= 1) n = std::min(n, cap);
    } catch (const std::exception&) {
      // Unparsable values are ignored.
    }
  }
  return n;
}

void ParallelFor(
    std::ptrdiff_t n,
    const std::function<void(std::ptrdiff_t, std::ptrdiff_t)>& body) {
  if (n <= 0) return;
  const std::ptrdiff_t workers =
      std::min<std::ptrdiff_t>(WorkerCount(), std::max<std::ptrdiff_t>(1, n / 64));
  if (workers <= 1) {
    body(0, n);
    return;
  }
  std::exception_ptr first_error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::ptrdiff_t chunk = (n + workers - 1) / workers;
    for (std::ptrdiff_t w = 0; w < workers; ++w) {
      const std::ptrdiff_t begin = w * chunk;
      const std::ptrdiff_t end = std::min(n, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back([&, begin, end] {
        try {
          body(begin, end);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      });
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace icdmd
