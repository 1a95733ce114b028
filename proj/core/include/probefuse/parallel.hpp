// Copyright (c) 2026 the probefuse authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>

namespace probefuse {

// Worker count: min(hardware_concurrency, PROBEFUSE_THREADS) when the
// environment variable is set, at least 1.
int worker_count();

// Runs fn(i) for i in [begin, end) over fixed contiguous chunks. Each index
// is owned by exactly one invocation, so writes to disjoint per-index
// outputs are race free and results do not depend on the thread count.
void parallel_for(int begin, int end, const std::function<void(int)> &fn);

}  // namespace probefuse
