#include "tnqe/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define TNQE_HAVE_AVX2_PATH 1
#endif

namespace tnqe::kernels::avx2 {

#if defined(TNQE_HAVE_AVX2_PATH)

void apply_pair(double* psi, std::size_t dim, std::size_t mask_hi, std::size_t mask_lo,
                const double* m) {
  // Four consecutive indices share the pair bits only when both masks sit
  // above bit 1; otherwise fall back to the reference loop.
  if (mask_lo < 4 || mask_hi < 4 || dim < 16) {
    scalar::apply_pair(psi, dim, mask_hi, mask_lo, m);
    return;
  }
  const std::size_t both = mask_hi | mask_lo;
  __m256d mm[16];
  for (int k = 0; k < 16; ++k) mm[k] = _mm256_set1_pd(m[k]);
  for (std::size_t i = 0; i < dim; i += 4) {
    if (i & both) continue;
    double* p0 = psi + i;
    double* p1 = psi + (i | mask_lo);
    double* p2 = psi + (i | mask_hi);
    double* p3 = psi + (i | both);
    const __m256d a0 = _mm256_loadu_pd(p0);
    const __m256d a1 = _mm256_loadu_pd(p1);
    const __m256d a2 = _mm256_loadu_pd(p2);
    const __m256d a3 = _mm256_loadu_pd(p3);
    __m256d r;
    r = _mm256_mul_pd(mm[0], a0);
    r = _mm256_fmadd_pd(mm[1], a1, r);
    r = _mm256_fmadd_pd(mm[2], a2, r);
    r = _mm256_fmadd_pd(mm[3], a3, r);
    const __m256d o0 = r;
    r = _mm256_mul_pd(mm[4], a0);
    r = _mm256_fmadd_pd(mm[5], a1, r);
    r = _mm256_fmadd_pd(mm[6], a2, r);
    r = _mm256_fmadd_pd(mm[7], a3, r);
    const __m256d o1 = r;
    r = _mm256_mul_pd(mm[8], a0);
    r = _mm256_fmadd_pd(mm[9], a1, r);
    r = _mm256_fmadd_pd(mm[10], a2, r);
    r = _mm256_fmadd_pd(mm[11], a3, r);
    const __m256d o2 = r;
    r = _mm256_mul_pd(mm[12], a0);
    r = _mm256_fmadd_pd(mm[13], a1, r);
    r = _mm256_fmadd_pd(mm[14], a2, r);
    r = _mm256_fmadd_pd(mm[15], a3, r);
    _mm256_storeu_pd(p0, o0);
    _mm256_storeu_pd(p1, o1);
    _mm256_storeu_pd(p2, o2);
    _mm256_storeu_pd(p3, r);
  }
}

void apply_single(double* psi, std::size_t dim, std::size_t mask, const double* m) {
  if (mask < 4 || dim < 8) {
    scalar::apply_single(psi, dim, mask, m);
    return;
  }
  const __m256d m0 = _mm256_set1_pd(m[0]), m1 = _mm256_set1_pd(m[1]);
  const __m256d m2 = _mm256_set1_pd(m[2]), m3 = _mm256_set1_pd(m[3]);
  for (std::size_t i = 0; i < dim; i += 4) {
    if (i & mask) continue;
    const __m256d a0 = _mm256_loadu_pd(psi + i);
    const __m256d a1 = _mm256_loadu_pd(psi + (i | mask));
    _mm256_storeu_pd(psi + i, _mm256_fmadd_pd(m1, a1, _mm256_mul_pd(m0, a0)));
    _mm256_storeu_pd(psi + (i | mask), _mm256_fmadd_pd(m3, a1, _mm256_mul_pd(m2, a0)));
  }
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), s1);
  }
  s0 = _mm256_add_pd(s0, s1);
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, s0);
  double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

#else

void apply_pair(double* psi, std::size_t dim, std::size_t mask_hi, std::size_t mask_lo,
                const double* m) {
  scalar::apply_pair(psi, dim, mask_hi, mask_lo, m);
}
void apply_single(double* psi, std::size_t dim, std::size_t mask, const double* m) {
  scalar::apply_single(psi, dim, mask, m);
}
double dot(const double* a, const double* b, std::size_t n) { return scalar::dot(a, b, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) {
  scalar::axpy(alpha, x, y, n);
}

#endif

}  // namespace tnqe::kernels::avx2
