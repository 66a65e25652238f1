#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mevo {

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_threads(int n) {
#ifdef _OPENMP
  if (n >= 1) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

// Apply fn(i) for i in [0, n). The parallel path requires fn to write only
// state owned by index i; under that contract the result is bitwise identical
// to the serial path for any thread count.
template <class Fn>
void parallel_for(std::int64_t n, const Fn& fn, bool parallel = true) {
#ifdef _OPENMP
  if (parallel && n > 1) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
#endif
  (void)parallel;
  for (std::int64_t i = 0; i < n; ++i) fn(i);
}

}  // namespace mevo
