#pragma once

namespace ieg {

// Number of OpenMP threads used by the batch kernels and the generators.
// Results never depend on it; 1 is the reference configuration.
void set_workers(int workers);
int workers();

}  // namespace ieg
