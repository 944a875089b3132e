#include "roughwave/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace roughwave {

namespace {

unsigned initial_jobs() {
    if (const char* env = std::getenv("ROUGHWAVE_JOBS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<unsigned>(v);
        } catch (...) {
        }
    }
    return 1;
}

thread_local bool inside_worker = false;

std::atomic<unsigned>& job_count() {
    static std::atomic<unsigned> n{initial_jobs()};
    return n;
}

}  // namespace

unsigned jobs() { return job_count().load(); }

void set_jobs(unsigned n) { job_count().store(std::max(1u, n)); }

void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& body) {
    if (end <= begin) return;
    const std::size_t count = end - begin;
    const std::size_t workers = inside_worker ? 1 : std::min<std::size_t>(jobs(), count);
    if (workers <= 1) {
        for (std::size_t i = begin; i < end; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{begin};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        const bool was_inside = inside_worker;
        inside_worker = true;
        struct Restore {
            bool v;
            ~Restore() { inside_worker = v; }
        } restore{was_inside};
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= end) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(end);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace roughwave
