#include "csg/kernels/kernels.hpp"

CSG_NAMESPACE_BEGIN
namespace kernels::scalar {

Real dot(const Real* a, const Real* b, std::size_t n) {
  Real acc = 0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(Real alpha, const Real* x, Real* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemm_nt(const Real* a, const Real* b, Real* c, std::size_t m,
             std::size_t n, std::size_t k) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      c[i * n + j] += dot(a + i * k, b + j * k, k);
}

void gemm_nn(const Real* a, const Real* b, Real* c, std::size_t m,
             std::size_t n, std::size_t k) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      const Real s = a[i * k + p];
      if (s != 0) axpy(s, b + p * n, c + i * n, n);
    }
}

void gemm_tn(const Real* a, const Real* b, Real* c, std::size_t m,
             std::size_t n, std::size_t k) {
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t i = 0; i < m; ++i) {
      const Real s = a[p * m + i];
      if (s != 0) axpy(s, b + p * n, c + i * n, n);
    }
}

}  // namespace kernels::scalar
CSG_NAMESPACE_END
