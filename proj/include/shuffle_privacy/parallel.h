//
// Copyright 2026 The Shuffle Privacy Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef SHUFFLE_PRIVACY_PARALLEL_H_
#define SHUFFLE_PRIVACY_PARALLEL_H_

#include <cstdint>
#include <functional>

namespace shuffle_privacy {

// Worker count: SHUFFLE_PRIV_THREADS if set to a positive integer, otherwise
// the hardware concurrency.
int WorkerCount();

// Runs fn(0), ..., fn(num_tasks - 1) on up to WorkerCount() threads. Tasks
// must write only to their own slots; callers merge results in index order so
// output does not depend on scheduling.
void ParallelFor(int64_t num_tasks, const std::function<void(int64_t)>& fn);

}  // namespace shuffle_privacy

#endif  // SHUFFLE_PRIVACY_PARALLEL_H_
