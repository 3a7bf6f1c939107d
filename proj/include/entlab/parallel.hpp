#pragma once

#include <functional>

namespace entlab {

/// Worker cap: ENTLAB_THREADS when set (≥ 1), else hardware concurrency.
int thread_cap();

/// Runs fn(0..n-1) on up to `threads` workers (0 = thread_cap()). Calls made
/// from inside a worker run serially, so nested parallel sections do not
/// oversubscribe. The first exception thrown by any task is rethrown.
void parallel_for(int n, const std::function<void(int)>& fn, int threads = 0);

}  // namespace entlab
