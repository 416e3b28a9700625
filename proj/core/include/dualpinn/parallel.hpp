#pragma once

#include <cstddef>
#include <functional>

namespace dualpinn {

/// Worker cap: DUALPINN_THREADS when set, else hardware concurrency.
int worker_count();

/// Splits [0, n) into a fixed number of chunks (independent of how many
/// threads actually run) and invokes fn(chunk_index, begin, end) for each.
/// Callers that reduce per-chunk results in chunk-index order get bitwise
/// identical totals for any thread count.
void for_each_chunk(std::size_t n,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

/// Number of chunks for_each_chunk will use for a batch of size n.
std::size_t chunk_count(std::size_t n);

}  // namespace dualpinn
