// AVX2 + FMA variant of the quadratic-form scan. Compiled in its own TU with
// -mavx2 -mfma; selection happens at runtime in kernels.cpp.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <limits>

#include "adpmpc/kernels.hpp"

namespace adpmpc::kernels {

MinResult quadform_min_avx2(const double* mats, std::size_t count,
                            std::size_t dim2, const double* outer) {
    MinResult best{std::numeric_limits<double>::infinity(), -1};
    const std::size_t vec_end = dim2 - (dim2 % 4);
    for (std::size_t i = 0; i < count; ++i) {
        const double* m = mats + i * dim2;
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t k = 0; k < vec_end; k += 4) {
            acc = _mm256_fmadd_pd(_mm256_loadu_pd(m + k),
                                  _mm256_loadu_pd(outer + k), acc);
        }
        __m128d lo = _mm256_castpd256_pd128(acc);
        __m128d hi = _mm256_extractf128_pd(acc, 1);
        __m128d sum2 = _mm_add_pd(lo, hi);
        double value = _mm_cvtsd_f64(_mm_add_sd(sum2, _mm_unpackhi_pd(sum2, sum2)));
        for (std::size_t k = vec_end; k < dim2; ++k) value += m[k] * outer[k];
        if (value < best.value) {
            best.value = value;
            best.index = static_cast<int>(i);
        }
    }
    return best;
}

}  // namespace adpmpc::kernels

#endif
