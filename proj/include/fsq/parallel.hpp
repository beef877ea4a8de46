#pragma once

#include <cstddef>
#include <functional>

namespace fsq {

/// Worker cap used by the parallel loops (0 = hardware concurrency).
/// Results never depend on this value; work is split deterministically.
void set_thread_count(unsigned count) noexcept;
unsigned thread_count() noexcept;

/// Calls body(i) for i in [0, count), spread over up to thread_count()
/// workers. The first exception thrown by any body is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace fsq
