#pragma once

#include <cstddef>
#include <functional>

namespace wqst {

// Process-wide cap on worker threads (the CLI's --jobs). 0 means hardware
// concurrency. Results never depend on this value.
void set_max_threads(unsigned n);
unsigned max_threads();

// Runs body(i) for i in [0, n). Nested calls from inside a worker run
// serially. The first exception thrown by any body is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace wqst
