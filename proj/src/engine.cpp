#include "qkdfs/engine.hpp"

namespace qkdfs {

int available_workers() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace qkdfs
