#pragma once

#include <cstddef>
#include <functional>

namespace hck {

// Number of worker threads to use for `requested` (0 = hardware concurrency).
unsigned resolve_threads(unsigned requested);

// Runs body(i) for every i in [0, count) on up to `threads` workers. Indices
// are claimed dynamically, so body must write only to slot i of its outputs.
// The first exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace hck
