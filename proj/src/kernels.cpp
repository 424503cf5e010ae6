#include "adpmpc/kernels.hpp"

#include <atomic>
#include <limits>

namespace adpmpc::kernels {

MinResult quadform_min_scalar(const double* mats, std::size_t count,
                              std::size_t dim2, const double* outer) {
    MinResult best{std::numeric_limits<double>::infinity(), -1};
    for (std::size_t i = 0; i < count; ++i) {
        const double* m = mats + i * dim2;
        double acc = 0.0;
        for (std::size_t k = 0; k < dim2; ++k) acc += m[k] * outer[k];
        if (acc < best.value) {
            best.value = acc;
            best.index = static_cast<int>(i);
        }
    }
    return best;
}

namespace {
std::atomic<bool> g_force_scalar{false};
}

void set_force_scalar(bool force) { g_force_scalar.store(force); }

bool avx2_available() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

MinResult quadform_min(const double* mats, std::size_t count, std::size_t dim2,
                       const double* outer) {
#if defined(__x86_64__) || defined(_M_X64)
    static const bool use_avx2 = avx2_available();
    if (use_avx2 && !g_force_scalar.load())
        return quadform_min_avx2(mats, count, dim2, outer);
#endif
    return quadform_min_scalar(mats, count, dim2, outer);
}

}  // namespace adpmpc::kernels
