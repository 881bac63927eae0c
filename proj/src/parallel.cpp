#include "ieg/parallel.hpp"

#include <omp.h>

#include "ieg/error.hpp"

namespace ieg {

void set_workers(int workers) {
  if (workers < 1) throw InvalidArgument("--workers must be at least 1");
  omp_set_num_threads(workers);
}

int workers() { return omp_get_max_threads(); }

}  // namespace ieg
