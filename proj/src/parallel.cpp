#include "dsviz/parallel.hpp"

#include <algorithm>
#include <atomic>

#include <omp.h>

namespace dsviz {

namespace {
std::atomic<int> g_jobs{0};
}

void set_jobs(int jobs) { g_jobs = std::max(jobs, 0); }

int jobs() {
  const int j = g_jobs.load();
  return j > 0 ? j : omp_get_max_threads();
}

}  // namespace dsviz
