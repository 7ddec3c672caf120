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

#include "gmf/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>

namespace gmf
{

struct WorkPool::Job
{
    const std::function<void(std::ptrdiff_t, std::ptrdiff_t)>* body = nullptr;
    std::ptrdiff_t count = 0;
    std::ptrdiff_t grain = 1;
    std::atomic<std::ptrdiff_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
};

WorkPool::WorkPool(int threads)
{
    const int extra = std::max(threads, 1) - 1;
    workers_.reserve(static_cast<std::size_t>(extra));
    for (int t = 0; t < extra; ++t)
    {
        workers_.emplace_back([this] { worker_loop(); });
    }
}

WorkPool::~WorkPool()
{
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
    }
    wake_.notify_all();
    for (auto& worker : workers_) worker.join();
}

void WorkPool::run_chunks(Job& job)
{
    for (;;)
    {
        const std::ptrdiff_t begin = job.next.fetch_add(job.grain);
        if (begin >= job.count) return;
        const std::ptrdiff_t end = std::min(begin + job.grain, job.count);
        try
        {
            (*job.body)(begin, end);
        }
        catch (...)
        {
            std::lock_guard lock(job.error_mutex);
            if (!job.error) job.error = std::current_exception();
        }
    }
}

void WorkPool::worker_loop()
{
    std::size_t seen = 0;
    for (;;)
    {
        Job* job = nullptr;
        {
            std::unique_lock lock(mutex_);
            wake_.wait(lock, [&] { return stopping_ || generation_ != seen; });
            if (stopping_) return;
            seen = generation_;
            job = job_;
            if (job == nullptr) continue;
            ++active_;
        }
        run_chunks(*job);
        {
            std::lock_guard lock(mutex_);
            --active_;
        }
        done_.notify_all();
    }
}

void WorkPool::parallel_for(std::ptrdiff_t count,
                            const std::function<void(std::ptrdiff_t, std::ptrdiff_t)>& body)
{
    if (count <= 0) return;
    if (workers_.empty() || count == 1)
    {
        body(0, count);
        return;
    }
    Job job;
    job.body = &body;
    job.count = count;
    job.grain = std::max<std::ptrdiff_t>(1, count / (4 * static_cast<std::ptrdiff_t>(size())));
    {
        std::lock_guard lock(mutex_);
        job_ = &job;
        ++generation_;
    }
    wake_.notify_all();
    run_chunks(job);
    {
        std::unique_lock lock(mutex_);
        done_.wait(lock, [&] { return active_ == 0; });
        job_ = nullptr;
    }
    if (job.error) std::rethrow_exception(job.error);
}

void parallel_for(WorkPool* pool, std::ptrdiff_t count,
                  const std::function<void(std::ptrdiff_t, std::ptrdiff_t)>& body)
{
    if (pool != nullptr)
    {
        pool->parallel_for(count, body);
    }
    else if (count > 0)
    {
        body(0, count);
    }
}

int resolve_thread_count(int requested) noexcept
{
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace gmf
