#pragma once

#include <cstdint>
#include <string>

#include "tnqe/chem_io.hpp"
#include "tnqe/driver.hpp"

namespace tnqe {

// Two-qubit gates per Hadamard-test circuit over n system qubits with D
// disentangler layers.
std::int64_t cnot_count(int n_qubits, int d_layers);
// CNOT layer depth with one ancilla, or with a GHZ ancilla register.
std::int64_t layer_depth(int n_qubits, int d_layers, bool ghz);
double shots_per_h_element(double l1_norm, double delta);
double shots_per_overlap(double delta);

// Cited comparison column; not computed.
struct UccsdReference {
  double cnots_per_circuit = 3.0e3;
  int qubits = 12;
  double layer_depth = 3.9e3;
  double qpu_calls = 2.5e4;
  double batches = 1.6e4;
  double delta = 1e-8;
  double total_shots = 5.4e23;
  double total_cnots = 1.6e27;
  double correlation_fraction = 0.332;
};

struct ResourceInputs {
  int n_spatial = 0;
  int d_layers = 6;
  double delta_h = 1e-4;
  double delta_s = 1e-5;
  double l1_norm = 0.0;
  double qpu_calls = 0.0;
  double batches = 0.0;
};

struct ResourceReport {
  ResourceInputs in;
  std::int64_t cnots_per_circuit = 0;
  int qubits = 0;
  int qubits_ghz = 0;
  std::int64_t layer_depth = 0;
  std::int64_t layer_depth_ghz = 0;
  double shots_per_h = 0.0;
  double shots_per_s = 0.0;
  double total_shots = 0.0;
  double total_cnots = 0.0;
  bool published_schedule = false;
  UccsdReference uccsd;
};

// QPU calls are split evenly between Hamiltonian and overlap elements.
ResourceReport estimate_resources(const ResourceInputs& in);
// Counters from a finished run; l1 from the integrals in the run's basis.
ResourceReport tally(const ConvergenceTrace& trace, const FermionIntegrals& ints, double delta_h,
                     double delta_s, int d_layers);
// Fixed published call count (5.6e5) with batches = sweeps * (N - 1).
ResourceReport published_schedule(int n_spatial, double l1_norm, int sweeps = 48, int d_layers = 6,
                              double delta_h = 1e-4, double delta_s = 1e-5);

std::string report_json(const ResourceReport& r);
std::string report_table(const ResourceReport& r);

}  // namespace tnqe
