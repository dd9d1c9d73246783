#pragma once

#include <cstdint>
#include <functional>

namespace astro {

/// Global worker cap. Defaults to hardware_concurrency, can be lowered
/// via ASTRODECONV_THREADS or set_max_threads (the CLI --threads flag).
int max_threads();
void set_max_threads(int n);

/// Runs body(i) for i in [0, n). Work is split into contiguous chunks,
/// one per worker. Callers must ensure iterations write disjoint state;
/// all uses in this library do, so results never depend on the split.
void parallel_for(int64_t n, const std::function<void(int64_t)>& body);

/// Chunked variant: body(lo, hi) over disjoint ranges covering [0, n).
void parallel_chunks(int64_t n, const std::function<void(int64_t, int64_t)>& body);

}  // namespace astro
