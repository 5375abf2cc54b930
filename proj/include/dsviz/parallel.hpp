#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace dsviz {

/// Worker count used by every OpenMP region in the library. Results never
/// depend on it; only wall time does.
void set_jobs(int jobs);
int jobs();

/// Runs body(i) for i in [0, n) on the worker pool. If any call throws, the
/// exception from the lowest index is rethrown after the loop finishes, so
/// error reporting does not depend on scheduling.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs())
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace dsviz
