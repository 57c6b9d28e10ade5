#include "gmsfem/parallel.hpp"

#include <algorithm>
#include <atomic>

namespace gmsfem {

namespace {
int default_workers() {
#ifdef _OPENMP
  return std::max(1, omp_get_max_threads());
#else
  return 1;
#endif
}

std::atomic<int> g_workers{0};
}  // namespace

void set_workers(int n) { g_workers = n > 0 ? n : default_workers(); }

int workers() {
  const int n = g_workers.load();
  return n > 0 ? n : default_workers();
}

}  // namespace gmsfem
