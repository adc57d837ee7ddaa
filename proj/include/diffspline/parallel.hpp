#pragma once

#include <functional>

namespace diffspline {

// Worker cap: min(hardware, DIFFSPLINE_THREADS if set). Never below 1.
int max_threads();

// Static block partition of [0, count) over the worker pool. Used only for
// loops whose iterations write disjoint slots, so the schedule cannot change
// results; all reductions in the library stay serial for determinism.
void parallel_for(int count, const std::function<void(int begin, int end)>& body);

}  // namespace diffspline
