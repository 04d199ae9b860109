#pragma once

#include <cstddef>
#include <functional>

namespace monofit {

/// Worker count: MONOFIT_THREADS if set and positive, else hardware concurrency.
int thread_count();

/// Runs body(i) for 0 <= i < count on up to thread_count() threads, in contiguous chunks.
///
/// The first exception thrown by any chunk is rethrown on the calling thread. Calls made
/// from inside a worker run serially.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace monofit
