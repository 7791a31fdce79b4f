#include "bhlr/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace bhlr {

namespace {
std::atomic<int> g_workers{1};
}

void set_worker_count(int n) { g_workers = std::max(1, n); }
int worker_count() { return g_workers; }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f) {
  const auto workers = static_cast<std::size_t>(std::min<std::size_t>(g_workers, n));
  if (workers <= 1) {
    for (std::size_t k = 0; k < n; ++k) f(k);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t k = next++; k < n; k = next++) {
      try {
        f(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace bhlr
