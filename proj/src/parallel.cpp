#include "ecir/parallel.hpp"

#include <charconv>
#include <cstdlib>
#include <cstring>

#include <omp.h>

namespace ecir {

namespace {
int default_threads = -1;
}

void set_thread_count(int n)
{
    if (default_threads < 0) default_threads = omp_get_max_threads();
    omp_set_num_threads(n > 0 ? n : default_threads);
}

int thread_count() { return omp_get_max_threads(); }

int thread_count_from_env()
{
    const char* raw = std::getenv("ECIR_THREADS");
    if (raw == nullptr) return 0;
    int n = 0;
    const char* end = raw + std::strlen(raw);
    auto [ptr, ec] = std::from_chars(raw, end, n);
    if (ec != std::errc{} || ptr != end || n <= 0) return 0;
    return n;
}

}  // namespace ecir
