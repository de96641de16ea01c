#pragma once

#include <cstddef>
#include <functional>

namespace intent {

// Worker count used by parallel_for; defaults to the number of hardware threads.
int default_jobs();
void set_default_jobs(int jobs);

// Runs body(i) for i in [0, n). Results must be written by index so the outcome
// does not depend on scheduling. Nested calls run serially on the calling worker.
// The exception of the lowest failing index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, int jobs = 0);

}  // namespace intent
