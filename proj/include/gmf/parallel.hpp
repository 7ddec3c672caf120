/*
 * Copyright 2026 The gmf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace gmf
{

/// Fixed-size pool of worker threads. `parallel_for` splits an index range
/// into contiguous chunks; the calling thread takes part in the work.
/// Results written by index are independent of the pool size.
class WorkPool
{
public:
    explicit WorkPool(int threads = 1);
    ~WorkPool();

    WorkPool(const WorkPool&) = delete;
    WorkPool& operator=(const WorkPool&) = delete;

    [[nodiscard]] int size() const noexcept { return static_cast<int>(workers_.size()) + 1; }

    /// Calls body(begin, end) over disjoint chunks covering [0, count).
    /// The first exception thrown by a chunk is rethrown here.
    void parallel_for(std::ptrdiff_t count,
                      const std::function<void(std::ptrdiff_t, std::ptrdiff_t)>& body);

private:
    struct Job;

    void worker_loop();
    static void run_chunks(Job& job);

    std::vector<std::thread> workers_;
    std::mutex mutex_;
    std::condition_variable wake_;
    std::condition_variable done_;
    Job* job_ = nullptr;
    std::size_t generation_ = 0;
    int active_ = 0;
    bool stopping_ = false;
};

/// Runs body over [0, count) on `pool`, or inline when `pool` is null.
void parallel_for(WorkPool* pool, std::ptrdiff_t count,
                  const std::function<void(std::ptrdiff_t, std::ptrdiff_t)>& body);

/// Resolves a requested thread count: 0 means all hardware threads.
int resolve_thread_count(int requested) noexcept;

}  // namespace gmf
