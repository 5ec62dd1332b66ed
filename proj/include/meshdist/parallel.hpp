#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace meshdist {

// Worker count for a requested degree; 0 means "all hardware threads".
inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
#ifdef _OPENMP
    return std::max(1, omp_get_max_threads());
#else
    return 1;
#endif
}

// Runs body(begin, end, worker) over [0, count) in batches of `batch` items.
// Batches are handed out dynamically; `worker` is in [0, threads). Exceptions
// thrown by the body are rethrown on the calling thread.
template <typename Body>
void parallel_batches(std::size_t count, std::size_t batch, int threads, Body&& body) {
    if (count == 0) return;
    batch = std::max<std::size_t>(batch, 1);
    const std::size_t batches = (count + batch - 1) / batch;
    if (threads <= 1 || batches == 1) {
        for (std::size_t b = 0; b < batches; ++b) body(b * batch, std::min(count, (b + 1) * batch), 0);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
#ifdef _OPENMP
#pragma omp parallel num_threads(threads)
    {
        const int worker = omp_get_thread_num();
#pragma omp for schedule(dynamic, 1)
        for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(batches); ++b) {
            try {
                body(b * batch, std::min(count, (b + 1) * batch), worker);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    }
#else
    for (std::size_t b = 0; b < batches; ++b) body(b * batch, std::min(count, (b + 1) * batch), 0);
#endif
    if (error) std::rethrow_exception(error);
}

enum class Direction { Decreasing, Increasing };

// Shared scalar that only ever moves in one direction: its value is always the
// min (Decreasing) or max (Increasing) of everything committed so far, under any
// interleaving of concurrent commits.
template <typename Real, Direction Dir>
class MonotoneCell {
public:
    explicit MonotoneCell(Real initial) : value_(initial) {}

    Real load() const noexcept { return value_.load(std::memory_order_acquire); }

    static bool improves(Real candidate, Real current) noexcept {
        if constexpr (Dir == Direction::Decreasing)
            return candidate < current;
        else
            return candidate > current;
    }

    // Returns true when this call changed the value.
    bool commit(Real candidate) {
        if (trace_) {
            std::lock_guard lock(trace_mutex_);
            Real cur = value_.load(std::memory_order_relaxed);
            if (!improves(candidate, cur)) return false;
            value_.store(candidate, std::memory_order_release);
            trace_->push_back(candidate);
            return true;
        }
        Real cur = value_.load(std::memory_order_relaxed);
        while (improves(candidate, cur)) {
            if (value_.compare_exchange_weak(cur, candidate, std::memory_order_acq_rel, std::memory_order_relaxed)) return true;
        }
        return false;
    }

    // Records every successful commit into `log` (serializes commits).
    void trace_into(std::vector<Real>* log) { trace_ = log; }

private:
    std::atomic<Real> value_;
    std::vector<Real>* trace_ = nullptr;
    std::mutex trace_mutex_;
};

} // namespace meshdist
