#include "exactcoreset/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace exactcoreset {

namespace {
std::atomic<int> g_max_threads{0};  // 0 = use hardware default

int hardware_default() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}
}  // namespace

void set_max_threads(int n) { g_max_threads.store(n < 1 ? 0 : n); }

int max_threads() {
  const int n = g_max_threads.load();
  return n == 0 ? hardware_default() : n;
}

void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn) {
  if (n <= 0) {
    return;
  }
  const int workers = std::min<std::int64_t>(max_threads(), n);
  if (workers <= 1) {
    for (std::int64_t i = 0; i < n; ++i) {
      fn(i);
    }
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  const std::int64_t chunk = (n + workers - 1) / workers;
  for (int t = 0; t < workers; ++t) {
    const std::int64_t begin = t * chunk;
    const std::int64_t end = std::min(n, begin + chunk);
    if (begin >= end) {
      break;
    }
    pool.emplace_back([begin, end, &fn] {
      for (std::int64_t i = begin; i < end; ++i) {
        fn(i);
      }
    });
  }
  for (auto& th : pool) {
    th.join();
  }
}

}  // namespace exactcoreset
