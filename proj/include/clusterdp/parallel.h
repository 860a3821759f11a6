// Copyright 2026 The clusterdp Authors
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

#ifndef CLUSTERDP_PARALLEL_H_
#define CLUSTERDP_PARALLEL_H_

#include <functional>

namespace clusterdp {

// Calls fn(i) for every i in [0, count) on up to `threads` threads. Work is
// handed out one index at a time; callers write results into slot i so the
// outcome does not depend on scheduling. The first exception thrown by fn is
// rethrown after all workers stop.
void ParallelFor(int count, int threads, const std::function<void(int)>& fn);

}  // namespace clusterdp

#endif  // CLUSTERDP_PARALLEL_H_
