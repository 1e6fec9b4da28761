#pragma once

#include <cstddef>
#include <functional>

namespace synaptik {

// Worker count used by every chunk-parallel loop in the library. Results
// never depend on this value; only wall time does.
void set_thread_count(std::size_t n);
std::size_t thread_count();

// Splits [0, n) into at most thread_count() contiguous chunks and calls
// fn(chunk_index, begin, end) for each, one chunk per worker thread.
// Chunk boundaries depend only on n and the chunk count, so callers that
// need per-chunk partial results can merge them in chunk order.
void parallel_chunks(std::size_t n,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

// Convenience wrapper: fn(i) for every i in [0, n).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// Number of chunks parallel_chunks will use for a range of length n.
std::size_t chunk_count(std::size_t n);

}  // namespace synaptik
