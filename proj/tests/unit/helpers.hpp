#pragma once

#include <string>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "tnqe/chem_io.hpp"
#include "tnqe/common.hpp"

namespace tnqe::test {

inline std::string data_path(const std::string& name) { return std::string(TNQE_TEST_DATA) + "/" + name; }

inline Matrix random_matrix(int r, int c, CounterRng& rng) {
  Matrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = rng.normal();
  return m;
}

// Haar-ish orthogonal matrix; det fixed to `det` when nonzero.
inline Matrix random_orthogonal(int n, CounterRng& rng, int det = 0) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(n, n, rng));
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR();
  for (int i = 0; i < n; ++i)
    if (r(i, i) < 0) q.col(i) *= -1.0;
  if (det != 0 && (q.determinant() > 0) != (det > 0)) q.col(0) *= -1.0;
  return q;
}

// Real integrals with the full 8-fold symmetry and a positive-ish diagonal.
inline FermionIntegrals random_integrals(int n, int n_el, std::uint64_t seed, int ms2 = 0) {
  CounterRng rng(seed);
  FermionIntegrals ints = FermionIntegrals::zeros(n, n_el, ms2);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q <= p; ++q) {
      const double v = 0.3 * rng.normal() + (p == q ? -1.0 - 0.2 * p : 0.0);
      ints.h1(p, q) = v;
      ints.h1(q, p) = v;
    }
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) {
          const int pq = p * n + q, rs = r * n + s;
          if (p < q || r < s || pq < rs) continue;
          double v = 0.05 * rng.normal();
          if (p == q && r == s) v += 0.5;
          ints.set_eri(p, q, r, s, v);
        }
  ints.e_core = 0.7;
  return ints;
}

}  // namespace tnqe::test
