#include <atomic>
#include <cstdlib>
#include <string_view>

#include "csg/kernels/kernels.hpp"

CSG_NAMESPACE_BEGIN
namespace kernels {
namespace {

Isa initial_isa() {
  const bool avx2 = cpu_has_avx2();
  if (const char* env = std::getenv("CSG_ISA")) {
    const std::string_view v(env);
    if (v == "scalar") return Isa::scalar;
    if (v == "avx2" && avx2) return Isa::avx2;
  }
  return avx2 ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& isa_slot() {
  static std::atomic<Isa> slot{initial_isa()};
  return slot;
}

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  static const bool has = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return has;
#else
  return false;
#endif
}

Isa active_isa() { return isa_slot().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (isa == Isa::avx2 && !cpu_has_avx2()) isa = Isa::scalar;
  isa_slot().store(isa, std::memory_order_relaxed);
}

Real dot(const Real* a, const Real* b, std::size_t n) {
  return active_isa() == Isa::avx2 ? avx2::dot(a, b, n) : scalar::dot(a, b, n);
}

void axpy(Real alpha, const Real* x, Real* y, std::size_t n) {
  if (active_isa() == Isa::avx2)
    avx2::axpy(alpha, x, y, n);
  else
    scalar::axpy(alpha, x, y, n);
}

void gemm_nt(const Real* a, const Real* b, Real* c, std::size_t m, std::size_t n,
             std::size_t k) {
  if (active_isa() == Isa::avx2)
    avx2::gemm_nt(a, b, c, m, n, k);
  else
    scalar::gemm_nt(a, b, c, m, n, k);
}

void gemm_nn(const Real* a, const Real* b, Real* c, std::size_t m, std::size_t n,
             std::size_t k) {
  if (active_isa() == Isa::avx2)
    avx2::gemm_nn(a, b, c, m, n, k);
  else
    scalar::gemm_nn(a, b, c, m, n, k);
}

void gemm_tn(const Real* a, const Real* b, Real* c, std::size_t m, std::size_t n,
             std::size_t k) {
  if (active_isa() == Isa::avx2)
    avx2::gemm_tn(a, b, c, m, n, k);
  else
    scalar::gemm_tn(a, b, c, m, n, k);
}

}  // namespace kernels
CSG_NAMESPACE_END
