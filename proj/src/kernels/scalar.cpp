#include "tnqe/kernels.hpp"

namespace tnqe::kernels::scalar {

void apply_pair(double* psi, std::size_t dim, std::size_t mask_hi, std::size_t mask_lo,
                const double* m) {
  const std::size_t both = mask_hi | mask_lo;
  for (std::size_t i = 0; i < dim; ++i) {
    if (i & both) continue;
    double* p0 = psi + i;
    double* p1 = psi + (i | mask_lo);
    double* p2 = psi + (i | mask_hi);
    double* p3 = psi + (i | both);
    const double a0 = *p0, a1 = *p1, a2 = *p2, a3 = *p3;
    *p0 = m[0] * a0 + m[1] * a1 + m[2] * a2 + m[3] * a3;
    *p1 = m[4] * a0 + m[5] * a1 + m[6] * a2 + m[7] * a3;
    *p2 = m[8] * a0 + m[9] * a1 + m[10] * a2 + m[11] * a3;
    *p3 = m[12] * a0 + m[13] * a1 + m[14] * a2 + m[15] * a3;
  }
}

void apply_single(double* psi, std::size_t dim, std::size_t mask, const double* m) {
  for (std::size_t i = 0; i < dim; ++i) {
    if (i & mask) continue;
    const double a0 = psi[i], a1 = psi[i | mask];
    psi[i] = m[0] * a0 + m[1] * a1;
    psi[i | mask] = m[2] * a0 + m[3] * a1;
  }
}

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace tnqe::kernels::scalar
