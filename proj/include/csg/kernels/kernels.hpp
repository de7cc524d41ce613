#ifndef CSG_KERNELS_KERNELS_HPP_
#define CSG_KERNELS_KERNELS_HPP_

#include <cstddef>
#include <string_view>

#include "csg/core/real.hpp"

CSG_NAMESPACE_BEGIN
namespace kernels {

// Dense inner loops used by the autodiff engine. Every routine has a scalar
// reference implementation and an AVX2/FMA variant; the dispatcher picks
// one at startup. Matrices are row-major.

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

// True when the running CPU can execute the avx2 variants.
bool cpu_has_avx2();

// Currently dispatched instruction set. Honors CSG_ISA=scalar|avx2 on first
// use.
Isa active_isa();
void set_active_isa(Isa isa);

Real dot(const Real* a, const Real* b, std::size_t n);
// y += alpha * x
void axpy(Real alpha, const Real* x, Real* y, std::size_t n);
// C[m,n] += A[m,k] * B[n,k]^T
void gemm_nt(const Real* a, const Real* b, Real* c, std::size_t m,
             std::size_t n, std::size_t k);
// C[m,n] += A[m,k] * B[k,n]
void gemm_nn(const Real* a, const Real* b, Real* c, std::size_t m,
             std::size_t n, std::size_t k);
// C[m,n] += A[k,m]^T * B[k,n]
void gemm_tn(const Real* a, const Real* b, Real* c, std::size_t m,
             std::size_t n, std::size_t k);

namespace scalar {
Real dot(const Real* a, const Real* b, std::size_t n);
void axpy(Real alpha, const Real* x, Real* y, std::size_t n);
void gemm_nt(const Real* a, const Real* b, Real* c, std::size_t m,
             std::size_t n, std::size_t k);
void gemm_nn(const Real* a, const Real* b, Real* c, std::size_t m,
             std::size_t n, std::size_t k);
void gemm_tn(const Real* a, const Real* b, Real* c, std::size_t m,
             std::size_t n, std::size_t k);
}  // namespace scalar

namespace avx2 {
Real dot(const Real* a, const Real* b, std::size_t n);
void axpy(Real alpha, const Real* x, Real* y, std::size_t n);
void gemm_nt(const Real* a, const Real* b, Real* c, std::size_t m,
             std::size_t n, std::size_t k);
void gemm_nn(const Real* a, const Real* b, Real* c, std::size_t m,
             std::size_t n, std::size_t k);
void gemm_tn(const Real* a, const Real* b, Real* c, std::size_t m,
             std::size_t n, std::size_t k);
}  // namespace avx2

}  // namespace kernels
CSG_NAMESPACE_END

#endif  // CSG_KERNELS_KERNELS_HPP_
