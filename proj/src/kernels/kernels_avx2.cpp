// AVX2/FMA variants. Functions carry a target attribute so the rest of the
// library keeps the baseline ISA; the dispatcher only calls them when the
// CPU reports support.

#include <immintrin.h>

#include <type_traits>

#include "csg/kernels/kernels.hpp"

CSG_NAMESPACE_BEGIN
namespace kernels::avx2 {
namespace {

#define CSG_AVX2 __attribute__((target("avx2,fma")))

struct F32 {
  using V = __m256;
  static constexpr std::size_t kWidth = 8;
  CSG_AVX2 static V zero() { return _mm256_setzero_ps(); }
  CSG_AVX2 static V set1(float x) { return _mm256_set1_ps(x); }
  CSG_AVX2 static V load(const float* p) { return _mm256_loadu_ps(p); }
  CSG_AVX2 static void store(float* p, V v) { _mm256_storeu_ps(p, v); }
  CSG_AVX2 static V fmadd(V a, V b, V c) { return _mm256_fmadd_ps(a, b, c); }
  CSG_AVX2 static V add(V a, V b) { return _mm256_add_ps(a, b); }
  CSG_AVX2 static float hsum(V v) {
    const __m128 lo = _mm256_castps256_ps128(v);
    const __m128 hi = _mm256_extractf128_ps(v, 1);
    __m128 s = _mm_add_ps(lo, hi);
    s = _mm_add_ps(s, _mm_movehl_ps(s, s));
    s = _mm_add_ss(s, _mm_shuffle_ps(s, s, 0x55));
    return _mm_cvtss_f32(s);
  }
};

struct F64 {
  using V = __m256d;
  static constexpr std::size_t kWidth = 4;
  CSG_AVX2 static V zero() { return _mm256_setzero_pd(); }
  CSG_AVX2 static V set1(double x) { return _mm256_set1_pd(x); }
  CSG_AVX2 static V load(const double* p) { return _mm256_loadu_pd(p); }
  CSG_AVX2 static void store(double* p, V v) { _mm256_storeu_pd(p, v); }
  CSG_AVX2 static V fmadd(V a, V b, V c) { return _mm256_fmadd_pd(a, b, c); }
  CSG_AVX2 static V add(V a, V b) { return _mm256_add_pd(a, b); }
  CSG_AVX2 static double hsum(V v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    __m128d s = _mm_add_pd(lo, hi);
    s = _mm_add_sd(s, _mm_unpackhi_pd(s, s));
    return _mm_cvtsd_f64(s);
  }
};

using S = std::conditional_t<std::is_same_v<Real, float>, F32, F64>;
constexpr std::size_t W = S::kWidth;

CSG_AVX2 Real dot_impl(const Real* a, const Real* b, std::size_t n) {
  S::V acc0 = S::zero(), acc1 = S::zero();
  std::size_t i = 0;
  for (; i + 2 * W <= n; i += 2 * W) {
    acc0 = S::fmadd(S::load(a + i), S::load(b + i), acc0);
    acc1 = S::fmadd(S::load(a + i + W), S::load(b + i + W), acc1);
  }
  for (; i + W <= n; i += W) acc0 = S::fmadd(S::load(a + i), S::load(b + i), acc0);
  Real acc = S::hsum(S::add(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

CSG_AVX2 void axpy_impl(Real alpha, const Real* x, Real* y, std::size_t n) {
  const S::V va = S::set1(alpha);
  std::size_t i = 0;
  for (; i + W <= n; i += W) S::store(y + i, S::fmadd(va, S::load(x + i), S::load(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

// Four output columns at a time so each load of the A row is reused.
CSG_AVX2 void gemm_nt_impl(const Real* a, const Real* b, Real* c, std::size_t m,
                           std::size_t n, std::size_t k) {
  for (std::size_t i = 0; i < m; ++i) {
    const Real* ar = a + i * k;
    Real* cr = c + i * n;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      const Real* b0 = b + j * k;
      const Real* b1 = b0 + k;
      const Real* b2 = b1 + k;
      const Real* b3 = b2 + k;
      S::V s0 = S::zero(), s1 = S::zero(), s2 = S::zero(), s3 = S::zero();
      std::size_t p = 0;
      for (; p + W <= k; p += W) {
        const S::V av = S::load(ar + p);
        s0 = S::fmadd(av, S::load(b0 + p), s0);
        s1 = S::fmadd(av, S::load(b1 + p), s1);
        s2 = S::fmadd(av, S::load(b2 + p), s2);
        s3 = S::fmadd(av, S::load(b3 + p), s3);
      }
      Real r0 = S::hsum(s0), r1 = S::hsum(s1), r2 = S::hsum(s2), r3 = S::hsum(s3);
      for (; p < k; ++p) {
        r0 += ar[p] * b0[p];
        r1 += ar[p] * b1[p];
        r2 += ar[p] * b2[p];
        r3 += ar[p] * b3[p];
      }
      cr[j] += r0;
      cr[j + 1] += r1;
      cr[j + 2] += r2;
      cr[j + 3] += r3;
    }
    for (; j < n; ++j) cr[j] += dot_impl(ar, b + j * k, k);
  }
}

CSG_AVX2 void gemm_nn_impl(const Real* a, const Real* b, Real* c, std::size_t m,
                           std::size_t n, std::size_t k) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      const Real s = a[i * k + p];
      if (s != 0) axpy_impl(s, b + p * n, c + i * n, n);
    }
}

CSG_AVX2 void gemm_tn_impl(const Real* a, const Real* b, Real* c, std::size_t m,
                           std::size_t n, std::size_t k) {
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t i = 0; i < m; ++i) {
      const Real s = a[p * m + i];
      if (s != 0) axpy_impl(s, b + p * n, c + i * n, n);
    }
}

#undef CSG_AVX2

}  // namespace

Real dot(const Real* a, const Real* b, std::size_t n) { return dot_impl(a, b, n); }
void axpy(Real alpha, const Real* x, Real* y, std::size_t n) { axpy_impl(alpha, x, y, n); }
void gemm_nt(const Real* a, const Real* b, Real* c, std::size_t m, std::size_t n,
             std::size_t k) {
  gemm_nt_impl(a, b, c, m, n, k);
}
void gemm_nn(const Real* a, const Real* b, Real* c, std::size_t m, std::size_t n,
             std::size_t k) {
  gemm_nn_impl(a, b, c, m, n, k);
}
void gemm_tn(const Real* a, const Real* b, Real* c, std::size_t m, std::size_t n,
             std::size_t k) {
  gemm_tn_impl(a, b, c, m, n, k);
}

}  // namespace kernels::avx2
CSG_NAMESPACE_END
