#pragma once

#include <functional>

namespace kp2fpu {

// Worker count for parallel_for. 0 = auto (hardware concurrency, capped).
void set_num_threads(int n);
int num_threads();

// Splits [begin, end) into contiguous blocks, one per worker. Bodies must be
// independent per index: no reductions run through here, so results do not
// depend on the thread count.
void parallel_for(long begin, long end, const std::function<void(long, long)>& block);

}  // namespace kp2fpu
