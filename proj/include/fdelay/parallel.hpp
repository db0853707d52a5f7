#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

#include <omp.h>

namespace fdelay {

/// Selects the serial reference loop or the OpenMP loop for a data-parallel
/// kernel. Both produce bit-identical results.
enum class Execution { Serial, Parallel };

/// Runs body(i) for i in [0, n). Exceptions thrown by any iteration are
/// captured and the first one is rethrown on the calling thread.
template <class Body>
void parallel_for(std::ptrdiff_t n, Execution exec, Body&& body) {
  if (exec == Execution::Serial || n < 2) {
    for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace fdelay
