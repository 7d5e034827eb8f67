#pragma once

#include <cstddef>

// Hot loops for statevector work. Each routine has a portable scalar
// reference and an AVX2 variant; the dispatching entry points pick one at
// runtime from CPUID (override with TNQE_FORCE_SCALAR=1).
namespace tnqe::kernels {

enum class Isa { scalar, avx2 };

Isa detected_isa();
Isa active_isa();
void force_isa(Isa isa);  // tests only; clamps to what the CPU supports
const char* isa_name(Isa isa);

// Apply a real 4x4 matrix to the pair of index bits (mask_hi, mask_lo) of a
// dense vector. Local basis order is 2*b_hi + b_lo; m is row-major.
void apply_pair(double* psi, std::size_t dim, std::size_t mask_hi, std::size_t mask_lo,
                const double* m);
// Apply a real 2x2 matrix to one index bit.
void apply_single(double* psi, std::size_t dim, std::size_t mask, const double* m);
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);

namespace scalar {
void apply_pair(double* psi, std::size_t dim, std::size_t mask_hi, std::size_t mask_lo,
                const double* m);
void apply_single(double* psi, std::size_t dim, std::size_t mask, const double* m);
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace scalar

namespace avx2 {
void apply_pair(double* psi, std::size_t dim, std::size_t mask_hi, std::size_t mask_lo,
                const double* m);
void apply_single(double* psi, std::size_t dim, std::size_t mask, const double* m);
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace avx2

}  // namespace tnqe::kernels
