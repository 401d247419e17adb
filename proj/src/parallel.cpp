#include "hyla/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace hyla {

namespace {
std::atomic<std::size_t> g_threads{1};
}

void set_num_threads(std::size_t n) { g_threads = std::max<std::size_t>(1, n); }

std::size_t num_threads() { return g_threads; }

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk) {
  const std::size_t workers =
      std::min(num_threads(), std::max<std::size_t>(1, n / std::max<std::size_t>(1, min_chunk)));
  if (workers <= 1) {
    if (n > 0) body(0, n);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin < end) pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  body(0, std::min(n, chunk));
}

}  // namespace hyla
