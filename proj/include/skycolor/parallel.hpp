#pragma once

#include <functional>

namespace skycolor {

// Runs fn(0..count-1) across up to `workers` threads. Indices are claimed from
// an atomic counter; callers keep determinism by writing results into
// index-addressed slots. The first exception is rethrown after all join.
void parallel_for(int count, int workers, const std::function<void(int)>& fn);

}  // namespace skycolor
