// SPDX-License-Identifier: MIT
#pragma once

#include <functional>

namespace fsda {

/// Worker thread cap.  Reads FSDA_THREADS once (values < 1 mean 1); falls
/// back to 1 when unset so results are reproducible by default and the
/// desk-scale tests do not oversubscribe CI machines.
int max_threads();

/// Splits [begin, end) into contiguous chunks and runs chunk_fn(lo, hi) on up
/// to max_threads() threads.  Chunks never overlap, so as long as chunk_fn
/// writes only to its own index range the result is bitwise independent of
/// the thread count.  Runs inline when the range is small or only one thread
/// is allowed.
void parallel_for(int begin, int end,
                  const std::function<void(int, int)>& chunk_fn);

}  // namespace fsda
