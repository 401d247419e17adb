#pragma once

#include <cstddef>
#include <functional>

namespace hyla {

// Upper bound on worker threads used by row-parallel kernels (default 1).
void set_num_threads(std::size_t n);
std::size_t num_threads();

/// Runs body(begin, end) over disjoint contiguous chunks of [0, n). Every
/// kernel that uses this writes disjoint output rows and reduces in a fixed
/// order inside a row, so results do not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk = 64);

}  // namespace hyla
