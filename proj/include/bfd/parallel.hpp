#pragma once

#include <cstddef>
#include <functional>

namespace bfd {

/// Worker count for node-parallel loops. 0 selects hardware concurrency; when never
/// set, the BFD_THREADS environment variable is consulted.
void set_thread_count(int threads);
int thread_count();

/// Runs body(task) for task in [0, tasks). Tasks are claimed dynamically, so the
/// body must write only to task-owned storage for results to be thread-count independent.
void parallel_for(std::size_t tasks, const std::function<void(std::size_t)>& body);

}  // namespace bfd
