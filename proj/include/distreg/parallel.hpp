/*
 * Copyright 2026 The distreg Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <cstddef>
#include <functional>

namespace distreg {

/// Number of worker threads to use when the caller passes 0:
/// DISTREG_THREADS if set and positive, otherwise hardware concurrency.
unsigned default_thread_count();

/// Runs task(i) for i in [0, count) on up to `threads` workers (0 = default).
/// Tasks are handed out by an atomic counter, so each task must write only
/// to its own output slot. The first exception thrown by any task is
/// rethrown on the calling thread after all workers have joined.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& task);

}  // namespace distreg
