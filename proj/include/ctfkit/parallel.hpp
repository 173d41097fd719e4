// ctfkit/parallel.hpp
//
// Minimal fork-join helper. Work is split into fixed-size chunks whose
// boundaries do not depend on the thread count, so any per-chunk reduction
// combined in chunk order is bit-identical for 1 or N threads.

#pragma once

#include <cstddef>
#include <functional>

namespace ctfkit {

/// Number of worker threads used by parallel_for. Initialised from the
/// CTFKIT_THREADS environment variable, falling back to the hardware count.
std::size_t thread_count();
void set_thread_count(std::size_t n);

/// Calls body(begin, end) for consecutive chunks of [0, count). Nested calls
/// from inside a worker run inline.
void parallel_for(std::size_t count, std::size_t chunk,
                  const std::function<void(std::size_t, std::size_t)>& body);

/// Element-wise convenience wrapper.
void parallel_for_each(std::size_t count,
                       const std::function<void(std::size_t)>& body);

} // namespace ctfkit
