#pragma once

#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gmsfem {

enum class Execution { serial, parallel };

/// Number of OpenMP workers used by parallel kernels. Results never depend on it.
void set_workers(int n);
int workers();

/// Runs body(i) for i in [0, n). Each index writes only to its own output slot;
/// callers do any cross-index reduction afterwards in index order.
template <class Body>
void parallel_for(int n, Body&& body, Execution exec = Execution::parallel) {
  if (exec == Execution::serial || workers() <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
#pragma omp parallel for schedule(dynamic) num_threads(workers())
  for (int i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace gmsfem
