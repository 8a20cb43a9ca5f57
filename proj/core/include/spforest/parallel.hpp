#pragma once

#include <cstddef>
#include <functional>

namespace spforest {

/// Worker count used when a call does not specify one (0 = hardware concurrency).
void set_default_threads(unsigned threads);
unsigned default_threads();

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Tasks must write only
/// to slot i of their outputs so results do not depend on scheduling. The first
/// exception thrown by a task is rethrown after all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, unsigned threads = 0);

}  // namespace spforest
