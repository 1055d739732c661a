#pragma once

#include <cstddef>
#include <functional>

namespace gbwm {

// Process-wide cap on worker threads (0 = hardware concurrency). Results must
// not depend on this; parallel_for only splits index ranges, and callers are
// responsible for keeping per-index work independent and reductions ordered.
void set_max_threads(int n);
int max_threads();

// Runs fn(i) for i in [begin, end). Falls back to a plain loop when the range
// is small or only one thread is allowed.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& fn);

}  // namespace gbwm
