#include "tractoria/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace tractoria {

int max_threads() {
  int hw = int(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("TRACTORIA_THREADS")) {
    int cap = std::atoi(env);
    if (cap >= 1) hw = std::min(hw, cap);
  }
  return hw;
}

void parallel_for(size_t n, const std::function<void(size_t, size_t)>& body) {
  int nt = std::min<size_t>(size_t(max_threads()), n);
  if (nt <= 1 || n < 2) {
    body(0, n);
    return;
  }
  std::vector<std::thread> threads;
  size_t chunk = (n + nt - 1) / nt;
  for (int t = 0; t < nt; ++t) {
    size_t b = size_t(t) * chunk;
    size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    threads.emplace_back([&, b, e] { body(b, e); });
  }
  for (auto& th : threads) th.join();
}

} // namespace tractoria
