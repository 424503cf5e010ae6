#pragma once

#include <cstddef>

namespace adpmpc::kernels {

struct MinResult {
    double value;
    int index;
};

// Batch evaluation of min_i <mats_i, outer> where `mats` packs `count`
// symmetric dim x dim matrices row-major back to back and `outer` is the
// flattened outer product xbar*xbar^T. This is the hot loop of every value
// function query: the quadratic form xbar^T P xbar equals the Frobenius
// inner product of P with the outer product.
//
// Ties go to the lowest index in both variants.
MinResult quadform_min_scalar(const double* mats, std::size_t count,
                              std::size_t dim2, const double* outer);

#if defined(__x86_64__) || defined(_M_X64)
MinResult quadform_min_avx2(const double* mats, std::size_t count,
                            std::size_t dim2, const double* outer);
#endif

bool avx2_available();

/// Force the scalar path regardless of CPU support (testing hook).
void set_force_scalar(bool force);

/// Runtime-dispatched entry point.
MinResult quadform_min(const double* mats, std::size_t count, std::size_t dim2,
                       const double* outer);

}  // namespace adpmpc::kernels
