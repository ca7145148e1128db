#pragma once

#include <cstddef>
#include <functional>

namespace ctg {

// Runs fn(i) for i in [0, n). Work units must write only to their own output
// slots; results are then independent of scheduling, so a run is bit-identical
// for any thread count. threads == 0 picks hardware_concurrency, capped by the
// CTG_THREADS environment variable when set.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  unsigned threads = 0);

unsigned effective_thread_count(unsigned requested);

}  // namespace ctg
