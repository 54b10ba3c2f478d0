// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace sptw {

/// Worker count for fan-out work: hardware concurrency, capped by SPTW_THREADS when set.
std::size_t worker_count();

/// Runs fn(i) for i in [0, n) across worker_count() threads. Exceptions are rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace sptw
