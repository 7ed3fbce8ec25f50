#pragma once
// Thread cap for data-parallel loops; FOLHE_THREADS overrides the default.

namespace folhe {

int thread_count();

}  // namespace folhe

#if defined(_OPENMP)
#define FOLHE_PARALLEL_FOR _Pragma("omp parallel for schedule(static) num_threads(folhe::thread_count())")
#else
#define FOLHE_PARALLEL_FOR
#endif
