#pragma once

#include <cstddef>
#include <functional>

namespace rnash {

// Worker count used when a caller passes threads <= 0: hardware concurrency,
// overridden by RICCATI_NASH_THREADS when set.
[[nodiscard]] int default_thread_count();

// Runs body(begin, end) over [0, n) split into fixed-size chunks. Chunk
// boundaries depend only on n and chunk, never on the thread count, so a
// body that writes chunk-local results is deterministic.
void parallel_chunks(std::size_t n, std::size_t chunk, int threads,
                     const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace rnash
