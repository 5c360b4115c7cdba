/// Worker-count policy for the OpenMP batch kernels.
///
/// GAPPY_FUSE_THREADS caps the number of workers; results are identical for
/// any cap because parallel regions only fill independent per-burst slots
/// and every reduction happens serially in a fixed order afterwards.

#pragma once

namespace gappy {

/// Number of workers to use: min(omp_get_max_threads(), GAPPY_FUSE_THREADS)
/// when the variable is set and positive, otherwise omp_get_max_threads().
/// Always at least 1; returns 1 when built without OpenMP.
int worker_count();

}  // namespace gappy
