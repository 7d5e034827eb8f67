#pragma once

#include <map>
#include <utility>
#include <vector>

#include "tnqe/common.hpp"

namespace tnqe {

enum class GateKind { givens, fswap };

struct NetworkGate {
  int p = 0;  // acts on orbitals (p, p+1)
  double theta = 0.0;
  GateKind kind = GateKind::givens;
};

// Orbital rotation u = g_1 g_2 ... g_K D as a nearest-neighbour sequence.
// As an operator on states the rightmost factor acts first. d = 4 means the
// orbitals are spatial (gates act on both spins); d = 2 means single qubits.
struct GivensNetwork {
  int n = 0;
  int d = 4;
  std::vector<NetworkGate> gates;
  bool flip_last = false;  // D = diag(1, ..., 1, -1) when det u = -1

  bool swaps_only() const;
};

// 2x2 orbital matrix of a gate: givens(theta) -> [[c, s], [-s, c]],
// fswap -> [[0, 1], [1, 0]].
Matrix orbital_block(GateKind kind, double theta);

GivensNetwork givens_decompose(const Matrix& u, int d = 4);
Matrix givens_reconstruct(const GivensNetwork& net);

// d^2 x d^2 gate on two sites, basis index d*k1 + k2.
Matrix gate_matrix(GateKind kind, double theta, int d);

// u * (local block embedded at rows/cols p, p+1).
Matrix merge_local(const Matrix& u, int p, GateKind kind, double theta = 0.0);

// In-place action of the network on a full Fock-space vector (or on every
// column of a matrix).
void apply_rotation_network(Vector& psi, const GivensNetwork& net);
void apply_rotation_network(Matrix& cols, const GivensNetwork& net);
// Same, but with the inverse (transposed) rotation.
void apply_rotation_network_inverse(Vector& psi, const GivensNetwork& net);

// Qubit-level gate helpers shared with the circuit simulator.
void apply_qubit_pair(double* psi, int n_qubits, int q_hi, int q_lo, const Matrix& g4);
void apply_site_gate(double* psi, int n_qubits, int d, int p, GateKind kind, double theta,
                     bool transpose = false);

// Circuit that maximizes the central Schmidt rank when applied to |1..10..0>.
GivensNetwork max_entanglement_network(int n_qubits);

class RotationRegistry {
 public:
  int add(const Matrix& u);
  int size() const { return static_cast<int>(u_.size()); }
  const Matrix& u(int j) const { return u_.at(j); }
  void set(int j, const Matrix& u);
  void merge(int j, int p, GateKind kind, double theta = 0.0);

  // Network of u_i^T u_j, decomposed on demand and cached.
  const GivensNetwork& pair_network(int i, int j);
  // Network of u_j relative to the reference (RHF) frame.
  const GivensNetwork& network(int j);

 private:
  void invalidate(int j);
  std::vector<Matrix> u_;
  std::map<std::pair<int, int>, GivensNetwork> pair_cache_;
  std::map<int, GivensNetwork> abs_cache_;
};

}  // namespace tnqe
