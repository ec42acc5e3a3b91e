#pragma once

#include <cstddef>
#include <functional>

namespace clustergas {

/// Worker cap. Defaults to CLUSTERGAS_THREADS when set, else hardware
/// concurrency. Results never depend on this value.
std::size_t max_threads();
void set_max_threads(std::size_t n);

/// Runs body(i) for i in [0, n) on up to max_threads() workers. Each index
/// must write only to its own output slot; callers reduce in index order.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace clustergas
