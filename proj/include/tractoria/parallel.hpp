#ifndef TRACTORIA_PARALLEL_HPP
#define TRACTORIA_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace tractoria {

// Worker cap: min(hardware_concurrency, TRACTORIA_THREADS). All parallel
// regions operate on disjoint output ranges of pure computations, so results
// do not depend on the thread count.
int max_threads();

void parallel_for(size_t n, const std::function<void(size_t, size_t)>& body);

} // namespace tractoria

#endif
