#ifndef ORN_BLAS_HPP_
#define ORN_BLAS_HPP_

#include <cstddef>

namespace orn::blas {

// Row-major C = alpha * op(A) * op(B) + beta * C.
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n,
          std::size_t k, float alpha, const float* a, std::size_t lda,
          const float* b, std::size_t ldb, float beta, float* c,
          std::size_t ldc);
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n,
          std::size_t k, double alpha, const double* a, std::size_t lda,
          const double* b, std::size_t ldb, double beta, double* c,
          std::size_t ldc);

// Caps BLAS-internal threading; threads == 1 gives bit-deterministic runs.
void set_threads(int threads);

}  // namespace orn::blas

#endif  // ORN_BLAS_HPP_
