#pragma once

#include <cstddef>
#include <functional>

namespace tomo {

/// Sets the worker-thread cap used by parallel_for. n <= 0 restores the default
/// (TOMOPRIOR_THREADS if set, otherwise hardware concurrency).
void set_max_threads(int n);

int max_threads();

/// Runs fn(chunk_begin, chunk_end) over fixed chunks of [0, n).
///
/// The chunk boundaries depend only on n, never on the thread count, so any
/// accumulation done per chunk and reduced in chunk order is bitwise
/// reproducible no matter how many workers run.
void parallel_for_chunked(std::size_t n, std::size_t num_chunks,
                          const std::function<void(std::size_t, std::size_t)>& fn);

/// Convenience wrapper: one logical chunk per index, grouped into a fixed
/// number of ranges internally.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace tomo
