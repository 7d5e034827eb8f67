#pragma once

#include <filesystem>
#include <vector>

#include "tnqe/common.hpp"
#include "tnqe/hamiltonian.hpp"

namespace tnqe {

// Rank-3 site tensor, row-major [l][k][r].
struct SiteTensor {
  int dl = 1;
  int d = 2;
  int dr = 1;
  std::vector<double> data;

  SiteTensor() = default;
  SiteTensor(int l, int k, int r) : dl(l), d(k), dr(r), data(std::size_t(l) * k * r, 0.0) {}

  double& at(int l, int k, int r) { return data[(std::size_t(l) * d + k) * dr + r]; }
  double at(int l, int k, int r) const { return data[(std::size_t(l) * d + k) * dr + r]; }

  // (l k) x r view and l x (k r) view
  Eigen::Map<RowMatrix> as_left() { return {data.data(), dl * d, dr}; }
  Eigen::Map<const RowMatrix> as_left() const { return {data.data(), dl * d, dr}; }
  Eigen::Map<RowMatrix> as_right() { return {data.data(), dl, d * dr}; }
  Eigen::Map<const RowMatrix> as_right() const { return {data.data(), dl, d * dr}; }
};

double left_orth_error(const SiteTensor& a);
double right_orth_error(const SiteTensor& a);

class Mps {
 public:
  int d = 4;
  Charge sector;
  bool symmetric = true;  // charge labels meaningful
  int center = -1;        // canonical-center site, -1 when not canonical
  std::vector<SiteTensor> sites;
  std::vector<std::vector<Charge>> bonds;  // n+1 label lists; bonds[0] = {0}, bonds[n] = {sector}

  int n_sites() const { return static_cast<int>(sites.size()); }
  int bond_dim(int b) const { return static_cast<int>(bonds[b].size()); }
  int max_bond_dim() const;
  Charge local(int site, int k) const {
    return symmetric ? fock::local_charge(d, site, k) : Charge{};
  }
  // Parameter counts: all stored entries, and entries allowed by the charge labels.
  std::size_t dense_parameter_count() const;
  std::size_t sector_parameter_count() const;
};

struct TwoSiteTensor {
  int p = 0;
  int d = 4;
  int dl = 1;
  int dr = 1;
  bool symmetric = true;
  std::vector<Charge> left;   // charges of bond p
  std::vector<Charge> right;  // charges of bond p+2
  std::vector<double> data;   // [l][k1][k2][r]

  std::size_t index(int l, int k1, int k2, int r) const {
    return ((std::size_t(l) * d + k1) * d + k2) * dr + r;
  }
  double& at(int l, int k1, int k2, int r) { return data[index(l, k1, k2, r)]; }
  double at(int l, int k1, int k2, int r) const { return data[index(l, k1, k2, r)]; }
  double norm() const;
  Charge local(int site, int k) const {
    return symmetric ? fock::local_charge(d, site, k) : Charge{};
  }
  // Whether (l, k1, k2, r) is consistent with the bond labels.
  bool admissible(int l, int k1, int k2, int r) const {
    return left[l] + local(p, k1) + local(p + 1, k2) == right[r];
  }
};

// Charge-blocked singular value decomposition of a matrix whose nonzero
// entries only connect rows and columns carrying equal charges.
struct BlockedSvd {
  Matrix u;            // rows x kept
  Vector s;            // kept, descending
  Matrix vt;           // kept x cols
  std::vector<Charge> charges;  // per kept index
  Vector all;          // every singular value, descending
};
BlockedSvd blocked_svd(const Matrix& m, const std::vector<Charge>& row_q,
                       const std::vector<Charge>& col_q, int keep_max, double rel_cutoff);

Mps random_mps(int n_sites, int d, Charge sector, int chi, std::uint64_t seed);
// Product of given local vectors (no charge labels).
Mps product_mps(int d, const std::vector<Vector>& locals);
// Occupation-basis product state with charge labels; k[i] is the local index.
Mps basis_state_mps(int d, const std::vector<int>& k, int n_electrons_hint = -1);
// Sequential SVD of a dense vector, no charge labels; bond dims capped at chi_max.
Mps mps_from_statevector(const Vector& psi, int n_sites, int d, int chi_max);

void canonicalize(Mps& mps, int p);
double normalize(Mps& mps);

TwoSiteTensor two_site_tensor(const Mps& mps, int p);

struct SplitResult {
  SiteTensor left;
  SiteTensor right;
  Vector sigma;              // kept, renormalized, descending
  Vector all_sigma;          // full spectrum, normalized, descending
  std::vector<Charge> bond;  // labels of the new bond
  double xi = 0.0;
};
SplitResult svd_split(const TwoSiteTensor& t, int chi_max);
// Write a split back into sites p, p+1; the center moves to p+1 when
// center_right, otherwise it stays at p.
void put_two_site(Mps& mps, int p, const SplitResult& s, bool center_right = true);

double schmidt_entropy(const Mps& mps, int bond);
Vector schmidt_values(const Mps& mps, int bond);

Vector to_statevector(const Mps& mps);
double inner(const Mps& a, const Mps& b);
double amplitude(const Mps& mps, const std::vector<int>& k);
Mps split_d4_to_d2(const Mps& mps);
double expectation(const Mps& mps, const SparseHamiltonian& h);

void save_mps(const Mps& mps, const std::filesystem::path& path);
Mps load_mps(const std::filesystem::path& path);

}  // namespace tnqe
