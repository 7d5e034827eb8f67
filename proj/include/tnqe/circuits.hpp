#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tnqe/common.hpp"
#include "tnqe/mps.hpp"
#include "tnqe/rotations.hpp"

namespace tnqe {

// One gate: a 4x4 matrix on (q0, q1) with basis index 2*b(q0) + b(q1), or a
// 2x2 matrix on q0 when q1 < 0. A non-negative control makes the gate act
// only where that qubit is 1.
struct CircuitGate {
  int q0 = 0;
  int q1 = -1;
  Matrix m;
  int control = -1;

  bool two_qubit() const { return q1 >= 0; }
};

struct Netlist {
  int n_qubits = 0;
  std::vector<CircuitGate> gates;  // application order

  void validate(double tol = 1e-10) const;
  int two_qubit_count() const;
};

// In-place action on a statevector over `n_qubits` (qubit q at index bit
// n_qubits-1-q). The netlist may address a prefix of the register.
void apply_gate(Vector& psi, int n_qubits, const CircuitGate& g, bool transpose = false);
void apply_netlist(Vector& psi, int n_qubits, const Netlist& net);
void apply_netlist_inverse(Vector& psi, int n_qubits, const Netlist& net);
Vector prepare_state(const Netlist& net);

Matrix cx_matrix();
Matrix cz_matrix();

struct CompileResult {
  Netlist netlist;
  double fidelity = 0.0;
  int layers = 0;
  std::vector<double> fidelity_per_layer;  // after re-optimization at each depth
};

// Staircase of two-qubit gates preparing a chi <= 2 MPS from |0...0>.
Netlist staircase_from_mps(const Mps& mps);

// Iterated disentangling of a d=2 state with at most d_max staircase layers.
// Each new layer is followed by reopt_iters polar-factor sweeps over all
// gates; final_iters more sweeps run after the last layer. Sweeps stop early
// once the infidelity drops below stop_infidelity.
CompileResult disentangler_compile(const Mps& mps, int d_max, int reopt_iters = 10,
                                   double stop_infidelity = 1e-12, int final_iters = 0);
CompileResult disentangler_compile(const Vector& psi, int n_qubits, int d_max, int reopt_iters = 10,
                                   double stop_infidelity = 1e-12, int final_iters = 0);
// Ancilla-controlled version of a netlist; the ancilla is qubit `ancilla`
// (default: one past the last system qubit).
Netlist controlled_lift(const Netlist& net, int ancilla = -1);

// P(0) - P(1) of the ancilla for H, c-U_i, G, c-P, c-U_j^T, H. `pauli` is a
// string over I, X, Y, Z per system qubit.
double hadamard_test(const Netlist& u_i, const Netlist& u_j, const GivensNetwork* rotation,
                     const std::string& pauli = "");

void write_netlist(const Netlist& net, std::ostream& os);
Netlist read_netlist(std::istream& is);

}  // namespace tnqe
