#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>

namespace ecir {

// Every per-pixel kernel has two drivers. `serial` is the reference loop kept
// for testing; `parallel` splits pixels across OpenMP threads. Both perform
// identical per-pixel arithmetic, so results are bitwise equal.
enum class Exec { serial, parallel };

/// Sets the OpenMP team size used by Exec::parallel. n <= 0 restores the default.
void set_thread_count(int n);
int thread_count();

/// Thread count from the ECIR_THREADS environment variable, or 0 when unset/invalid.
int thread_count_from_env();

/// Calls fn(i) for i in [0, count). Exceptions thrown by fn are captured and the
/// first one is rethrown after the loop.
template <class Fn>
void for_each_index(Exec exec, std::size_t count, Fn&& fn)
{
    if (exec == Exec::serial) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    // Contiguous chunks, one per work item, each run by the plain serial loop.
    constexpr std::size_t chunk = 256;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto chunks = static_cast<std::ptrdiff_t>((count + chunk - 1) / chunk);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < chunks; ++c) {
        try {
            const std::size_t end = std::min(count, static_cast<std::size_t>(c + 1) * chunk);
            for (std::size_t i = static_cast<std::size_t>(c) * chunk; i < end; ++i) fn(i);
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

/// Calls fn(begin, end) over consecutive blocks of at most `block` indices, so a
/// kernel can stream frames through a contiguous pixel range.
template <class Fn>
void for_each_block(Exec exec, std::size_t count, std::size_t block, Fn&& fn)
{
    const std::size_t blocks = (count + block - 1) / block;
    for_each_index(exec, blocks, [&](std::size_t b) { fn(b * block, std::min(count, (b + 1) * block)); });
}

}  // namespace ecir
