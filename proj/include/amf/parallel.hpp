#pragma once

#include <cstddef>
#include <functional>

namespace amf {

/// Worker count used by parallel_for. 0 selects the hardware concurrency.
void set_thread_count(std::size_t threads);
std::size_t thread_count();

/// Calls body(i) for i in [0, n). Each index is handled exactly once and
/// callers write results into slot i, so the output never depends on the
/// number of workers. The first exception thrown by any body is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace amf
