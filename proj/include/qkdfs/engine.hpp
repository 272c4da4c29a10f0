#pragma once

// Round scheduling for the Monte Carlo kernels. Every round r draws from
// derive_stream(seed, r); accumulators hold integer counters and merge by
// addition, so the aggregate is independent of the worker count.

#include "qkdfs/random.hpp"

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qkdfs {

struct RunOptions {
  std::uint64_t seed = 0;
  // 1 selects the serial reference loop; 0 uses every available thread.
  int workers = 1;
};

int available_workers();

// Reference implementation: one thread, rounds in order.
template <class Acc, class Kernel>
Acc run_rounds_serial(std::uint64_t n, std::uint64_t seed, Kernel&& kernel) {
  Acc acc{};
  for (std::uint64_t r = 0; r < n; ++r) {
    Stream stream = derive_stream(seed, r);
    kernel(acc, stream, r);
  }
  return acc;
}

template <class Acc, class Kernel>
Acc run_rounds_parallel(std::uint64_t n, std::uint64_t seed, int workers, Kernel&& kernel) {
  Acc total{};
#ifdef _OPENMP
  const int threads = workers > 0 ? workers : omp_get_max_threads();
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel num_threads(threads)
  {
    Acc local{};
#pragma omp for schedule(static)
    for (std::int64_t r = 0; r < count; ++r) {
      Stream stream = derive_stream(seed, static_cast<std::uint64_t>(r));
      kernel(local, stream, static_cast<std::uint64_t>(r));
    }
#pragma omp critical(qkdfs_merge)
    total.merge(local);
  }
#else
  (void)workers;
  total = run_rounds_serial<Acc>(n, seed, kernel);
#endif
  return total;
}

template <class Acc, class Kernel>
Acc run_rounds(std::uint64_t n, const RunOptions& opts, Kernel&& kernel) {
  if (opts.workers == 1) return run_rounds_serial<Acc>(n, opts.seed, kernel);
  return run_rounds_parallel<Acc>(n, opts.seed, opts.workers, kernel);
}

}  // namespace qkdfs
