// Copyright 2026 The fusekit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// common/parallel.h

#ifndef FUSEKIT_COMMON_PARALLEL_H_
#define FUSEKIT_COMMON_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace fusekit {

/// Runs fn(i) for i in [0, n) on up to `threads` worker threads. Work items
/// must write to disjoint outputs. The first exception thrown by any item is
/// rethrown on the calling thread after all workers join.
void ParallelFor(size_t n, int threads, const std::function<void(size_t)> &fn);

}  // namespace fusekit

#endif  // FUSEKIT_COMMON_PARALLEL_H_
