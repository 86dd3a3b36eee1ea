#pragma once

#include <cstddef>
#include <exception>
#include <vector>

#include <omp.h>

namespace led {

/// Runs body(i) for i in [0, n) on up to `jobs` OpenMP threads (0 = runtime
/// default). The exception thrown by the lowest failing index is rethrown
/// after the loop, so failures do not depend on scheduling.
template <typename Body>
void parallel_for(std::size_t n, int jobs, Body&& body) {
    if (n == 0) return;
    std::vector<std::exception_ptr> failures(n);
    const int threads = jobs > 0 ? jobs : omp_get_max_threads();
    const auto count = static_cast<long long>(n);
#pragma omp parallel for num_threads(threads) schedule(dynamic, 1)
    for (long long i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            failures[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }
}

}  // namespace led
