#pragma once

#include <cstddef>
#include <functional>

namespace roughwave {

// Worker count for parallel loops. Defaults to ROUGHWAVE_JOBS when set, else 1.
unsigned jobs();
void set_jobs(unsigned n);

// Runs body(i) for i in [begin, end). Iterations must write disjoint outputs;
// results are then independent of the worker count.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& body);

}  // namespace roughwave
