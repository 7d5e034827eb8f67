#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tnqe/common.hpp"

namespace tnqe {

// Spatial-orbital integrals, chemists' notation (pq|rs), Hartree.
struct FermionIntegrals {
  int n_spatial = 0;
  int n_electrons = 0;
  int ms2 = 0;
  double e_core = 0.0;
  Matrix h1;
  std::vector<double> h2;  // n^4, index ((p*n + q)*n + r)*n + s
  std::string label;

  static FermionIntegrals zeros(int n, int n_electrons, int ms2 = 0);

  double eri(int p, int q, int r, int s) const {
    return h2[((static_cast<std::size_t>(p) * n_spatial + q) * n_spatial + r) * n_spatial + s];
  }
  // Writes all 8 symmetric images.
  void set_eri(int p, int q, int r, int s, double v);

  Charge sector() const { return sector_from(n_electrons, ms2); }

  // Throws PreconditionError when an invariant is violated.
  void validate(double tol = 1e-12) const;
};

FermionIntegrals parse_fcidump(std::istream& in);
FermionIntegrals parse_fcidump(const std::string& text);
FermionIntegrals load_fcidump(const std::filesystem::path& path);

std::string write_fcidump(const FermionIntegrals& ints);
void save_fcidump(const FermionIntegrals& ints, const std::filesystem::path& path);

// h1' = u^T h1 u and the matching 4-index transform.
FermionIntegrals rotate_integrals(const FermionIntegrals& ints, const Matrix& u);

// Sum of |coefficient| over the spin-orbital Hamiltonian terms, with the same
// assembly used by the sparse Hamiltonian (one-body doubled over spin, two-body
// h_PQRS = 1/2 (ps|qr) over the four spin-conserving combinations).
double coeff_l1_norm(const FermionIntegrals& ints);
// Plain sum over spatial integrals: sum|h_pq| + sum|(pq|rs)|.
double spatial_l1_norm(const FermionIntegrals& ints);

void check_orthogonal(const Matrix& u, double tol = 1e-10);

}  // namespace tnqe
