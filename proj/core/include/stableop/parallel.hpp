#pragma once

#include <cstddef>
#include <functional>

namespace stableop {

/// Worker cap: min(hardware_concurrency, STABLE_OP_LAB_THREADS if set).
/// A value of 1 disables threading entirely.
std::size_t worker_count();

/// Deterministic block-parallel loop: body(i) for i in [begin, end).
/// Work is split into contiguous blocks, one per worker; each worker owns its
/// block, so writes to disjoint per-index state need no synchronization and
/// results are independent of scheduling.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& body);

}  // namespace stableop
