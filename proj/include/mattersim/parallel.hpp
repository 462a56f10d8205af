#pragma once

#include <functional>

namespace mattersim {

/// Worker cap: MATTERSIM_THREADS when set (clamped to >= 1), otherwise the
/// hardware concurrency.
int thread_count();

/// Runs fn(0..n-1), fanned out over at most thread_count() workers. Each
/// index writes only its own output slot, so results are deterministic.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace mattersim
