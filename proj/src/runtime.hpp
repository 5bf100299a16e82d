#pragma once

namespace cgmkit {

// Worker thread count for BLAS and internal loops. Resolved once from the
// CGMKIT_THREADS environment variable (default: hardware concurrency,
// capped at 8). Fixed for the lifetime of the process so that repeated
// runs on one machine partition work identically.
int thread_count();

// Applies thread_count() to the BLAS backend. Called lazily by the tensor
// kernels; safe to call more than once.
void configure_blas_threads();

}  // namespace cgmkit
