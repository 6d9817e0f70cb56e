#pragma once

#include <Eigen/Core>

#include <functional>

namespace rdh {

/// Worker count used by row-parallel kernels. Defaults to the RDH_THREADS
/// environment variable, else std::thread::hardware_concurrency().
int num_threads();
void set_num_threads(int n);

/// Runs `body(begin, end)` over contiguous chunks of [0, n). Each index is
/// visited exactly once; chunking never affects results because every kernel
/// writes disjoint rows.
void parallel_for(Eigen::Index n, const std::function<void(Eigen::Index, Eigen::Index)>& body);

}  // namespace rdh
