#pragma once

#include <cstddef>
#include <exception>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace grassdisagg {

/// Worker count for an OpenMP region. jobs <= 0 means "runtime default".
inline int resolve_jobs(int jobs) {
#ifdef _OPENMP
    return jobs > 0 ? jobs : omp_get_max_threads();
#else
    (void)jobs;
    return 1;
#endif
}

/// Runs body(i) for i in [0, n) on up to `jobs` threads. Iterations must be
/// independent and write only to their own slot; output is then identical
/// for any thread count. If iterations throw, the exception from the lowest
/// index is rethrown after the loop, as the serial loop would have.
template <typename Body>
void parallel_for(std::size_t n, int jobs, Body&& body) {
    const int threads = resolve_jobs(jobs);
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
#ifdef _OPENMP
    std::vector<std::exception_ptr> errors(n);
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (long long i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
#else
    for (std::size_t i = 0; i < n; ++i) body(i);
#endif
}

}  // namespace grassdisagg
