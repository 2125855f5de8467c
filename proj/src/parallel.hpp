#pragma once

#include <cstddef>
#include <functional>

namespace mobeval {

/// Runs fn(0) .. fn(n-1), on up to `jobs` worker threads when jobs > 1.
/// Callers own any cross-task ordering: results must be written to
/// preallocated slots so the outcome is schedule-independent.
void parallel_for(std::size_t n, int jobs,
                  const std::function<void(std::size_t)>& fn);

}  // namespace mobeval
