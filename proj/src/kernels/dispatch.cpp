#include <atomic>
#include <cstdlib>
#include <cstring>

#include "tnqe/kernels.hpp"

namespace tnqe::kernels {

namespace {

Isa probe() {
#if (defined(__x86_64__) || defined(_M_X64)) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Isa::avx2;
#endif
  return Isa::scalar;
}

Isa initial() {
  const char* env = std::getenv("TNQE_FORCE_SCALAR");
  if (env && std::strcmp(env, "0") != 0) return Isa::scalar;
  return probe();
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{initial()};
  return isa;
}

}  // namespace

Isa detected_isa() {
  static const Isa isa = probe();
  return isa;
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
  if (isa == Isa::avx2 && detected_isa() != Isa::avx2) isa = Isa::scalar;
  current().store(isa, std::memory_order_relaxed);
}

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

void apply_pair(double* psi, std::size_t dim, std::size_t mask_hi, std::size_t mask_lo,
                const double* m) {
  if (active_isa() == Isa::avx2)
    avx2::apply_pair(psi, dim, mask_hi, mask_lo, m);
  else
    scalar::apply_pair(psi, dim, mask_hi, mask_lo, m);
}

void apply_single(double* psi, std::size_t dim, std::size_t mask, const double* m) {
  if (active_isa() == Isa::avx2)
    avx2::apply_single(psi, dim, mask, m);
  else
    scalar::apply_single(psi, dim, mask, m);
}

double dot(const double* a, const double* b, std::size_t n) {
  return active_isa() == Isa::avx2 ? avx2::dot(a, b, n) : scalar::dot(a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  if (active_isa() == Isa::avx2)
    avx2::axpy(alpha, x, y, n);
  else
    scalar::axpy(alpha, x, y, n);
}

}  // namespace tnqe::kernels
