// SPDX-License-Identifier: Apache-2.0

#ifndef BQE_THREADING_HPP
#define BQE_THREADING_HPP

#include <cstdint>
#include <functional>

namespace bqe {

// Worker cap for parallel loops. Resolved once from BQE_NUM_THREADS, can be
// overridden at runtime (e.g. --deterministic forces 1, though results are
// identical at any thread count by construction).
int max_threads();
void set_max_threads(int n);

// Static row partition over [0, total). Each index is processed by exactly
// one worker with a fixed per-index evaluation order, so results do not
// depend on the thread count.
void parallel_for(int64_t total, const std::function<void(int64_t, int64_t)>& chunk_fn);

}

#endif
