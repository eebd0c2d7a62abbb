#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace unfold {

inline void set_workers(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

inline int workers() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

/* Data-parallel loop over [0, n). Iterations must be independent. */
template <typename F>
void parallel_for(std::size_t n, F&& body) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 4)
    for (long long i = 0; i < (long long)n; ++i) body((std::size_t)i);
#else
    for (std::size_t i = 0; i < n; ++i) body(i);
#endif
}

template <typename F>
void serial_for(std::size_t n, F&& body) {
    for (std::size_t i = 0; i < n; ++i) body(i);
}

}  // namespace unfold
