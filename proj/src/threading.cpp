#include "mrfmoco/threading.hpp"

#include <atomic>

namespace mrfmoco {

namespace {
std::atomic<int> g_workers{1};
}

int worker_count() { return g_workers.load(std::memory_order_relaxed); }

void set_worker_count(int n) {
  g_workers.store(n < 1 ? 1 : n, std::memory_order_relaxed);
}

}  // namespace mrfmoco
