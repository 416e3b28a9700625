#include "dualpinn/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace dualpinn {

namespace {
constexpr std::size_t kChunks = 16;
}

int worker_count() {
  if (const char* env = std::getenv("DUALPINN_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::size_t chunk_count(std::size_t n) { return std::min(kChunks, std::max<std::size_t>(n, 1)); }

void for_each_chunk(std::size_t n,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  const std::size_t chunks = chunk_count(n);
  auto bounds = [&](std::size_t c) {
    // Even split; first (n % chunks) chunks get one extra element.
    const std::size_t base = n / chunks, extra = n % chunks;
    const std::size_t beg = c * base + std::min(c, extra);
    return std::pair<std::size_t, std::size_t>{beg, beg + base + (c < extra ? 1 : 0)};
  };

  const int threads = std::min<int>(worker_count(), static_cast<int>(chunks));
  if (threads <= 1 || n < 64) {
    for (std::size_t c = 0; c < chunks; ++c) {
      auto [beg, end] = bounds(c);
      fn(c, beg, end);
    }
    return;
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t c = next.fetch_add(1); c < chunks; c = next.fetch_add(1)) {
        auto [beg, end] = bounds(c);
        fn(c, beg, end);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace dualpinn
