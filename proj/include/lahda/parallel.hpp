#pragma once

#include <cstddef>
#include <functional>

namespace lahda {

/// Worker count used by parallel_for; 1 runs everything inline.
void set_thread_count(int n);
int thread_count();

/// Calls f(i) for i in [0, n) across the configured workers using static
/// contiguous chunks. Results must not depend on scheduling; the first
/// exception (lowest chunk) is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f);

} // namespace lahda
