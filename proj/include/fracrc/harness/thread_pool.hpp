#pragma once

#include <cstddef>
#include <functional>

namespace fracrc {

/// Number of workers to use when the caller asks for 0 (= all cores).
std::size_t resolve_jobs(std::size_t jobs);

/// Run fn(i) for i in [0, count) on up to `jobs` threads. Workers pull the
/// next index from a shared counter, so uneven cells balance themselves.
/// The first exception thrown by any fn is rethrown after all workers stop;
/// remaining indices are skipped once an exception is seen.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn);

}  // namespace fracrc
