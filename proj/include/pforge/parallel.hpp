// Copyright Contributors to the portrait-forge Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>

namespace pforge {

// Worker count used by the parallel helpers: min(hardware_concurrency,
// PORTRAIT_FORGE_THREADS) when the env var is set, at least 1.
int worker_count();

// Splits [0, count) into contiguous chunks, one chunk per worker. Each chunk
// is owned by exactly one thread, so callers get deterministic results as
// long as chunks do not alias output. Runs inline when count or workers is 1.
void parallel_chunks(int count, const std::function<void(int begin, int end)>& fn,
                     int max_workers = 0);

}  // namespace pforge
