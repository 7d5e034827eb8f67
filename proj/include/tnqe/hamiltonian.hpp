#pragma once

#include <Eigen/Sparse>

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "tnqe/chem_io.hpp"
#include "tnqe/common.hpp"

namespace tnqe {

// Fock-space layout shared by every module. Spin-orbitals are interleaved,
// qubit q = 2p + sigma (sigma = 0 up, 1 down), and qubit q lives at index bit
// (n_qubits - 1 - q), so site 0 is the most significant digit of a state
// index. A d=4 site p carries k = 2 n_up + n_dn over qubits (2p, 2p+1).
namespace fock {

inline std::uint64_t qubit_mask(int n_qubits, int q) {
  return std::uint64_t{1} << (n_qubits - 1 - q);
}
inline bool occupied(std::uint64_t x, int n_qubits, int q) {
  return (x & qubit_mask(n_qubits, q)) != 0;
}
// Jordan-Wigner parity of the qubits strictly before q.
inline int parity_before(std::uint64_t x, int n_qubits, int q) {
  const std::uint64_t all = (n_qubits >= 64) ? ~std::uint64_t{0}
                                             : ((std::uint64_t{1} << n_qubits) - 1);
  const std::uint64_t below = (std::uint64_t{1} << (n_qubits - q)) - 1;
  return __builtin_popcountll(x & (all ^ below)) & 1;
}
inline Charge charge_of(std::uint64_t x, int n_qubits) {
  Charge c;
  for (int q = 0; q < n_qubits; ++q)
    if (occupied(x, n_qubits, q)) (q % 2 == 0 ? c.up : c.dn) += 1;
  return c;
}
// Local charge of value k at a site with dimension d. For d=2 the site
// index decides the spin (even = up).
inline Charge local_charge(int d, int site, int k) {
  if (d == 4) return {(k >> 1) & 1, k & 1};
  return (site % 2 == 0) ? Charge{k, 0} : Charge{0, k};
}

}  // namespace fock

struct SectorBasis {
  int n_qubits = 0;
  bool restricted = false;
  Charge sector;
  std::vector<std::uint64_t> states;  // ascending full-space indices
  std::vector<std::int32_t> position;  // full index -> row, or -1

  std::size_t size() const { return states.size(); }
  std::size_t full_dim() const { return std::size_t{1} << n_qubits; }
};

SectorBasis make_sector_basis(int n_spatial, std::optional<Charge> sector);

class SparseHamiltonian {
 public:
  int n_spatial = 0;
  int d = 4;
  double e_core = 0.0;
  SectorBasis basis;
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;  // in basis rows/cols

  int n_qubits() const { return 2 * n_spatial; }
  std::size_t full_dim() const { return basis.full_dim(); }
  std::size_t dim() const { return basis.size(); }

  Vector gather(const Vector& full) const;
  Vector scatter(const Vector& restricted) const;
  // Columns are restricted vectors.
  Matrix apply(const Matrix& restricted) const;
  // Weight of a full-space vector outside the basis.
  double leakage(const Vector& full) const;

  std::uint64_t applications() const { return calls_->load(); }

 private:
  std::shared_ptr<std::atomic<std::uint64_t>> calls_ =
      std::make_shared<std::atomic<std::uint64_t>>(0);
};

// d only tags the intended site grouping; both share the same Fock basis.
SparseHamiltonian build_sparse_hamiltonian(const FermionIntegrals& ints, int d,
                                           std::optional<Charge> sector = std::nullopt);

double hf_energy(const FermionIntegrals& ints);
// Full-space occupation index of the closed-shell determinant.
std::uint64_t hf_determinant(int n_spatial, int n_electrons, int ms2 = 0);

struct GroundState {
  double energy = 0.0;
  Vector vec;  // full Fock space
  double residual = 0.0;
};
GroundState fci_ground_state(const SparseHamiltonian& h, std::uint64_t seed = 7);

// Exact <bra|op|ket> over full-space vectors; op == nullptr means identity.
double oracle_matrix_element(const Vector& bra, const SparseHamiltonian* op, const Vector& ket);

// Rayleigh quotient of a full-space vector.
double expectation(const SparseHamiltonian& h, const Vector& full);

}  // namespace tnqe
