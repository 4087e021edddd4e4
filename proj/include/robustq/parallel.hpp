#pragma once

#include <cstddef>
#include <functional>

namespace robustq {

/// Worker count: ROBUSTQ_WORKERS if set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on up to `workers` threads. Each index is
/// processed exactly once; callers write results into slot i so the output
/// does not depend on scheduling. The first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  std::size_t workers = worker_count());

}  // namespace robustq
