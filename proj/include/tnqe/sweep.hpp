#pragma once

#include <string>
#include <vector>

#include "tnqe/hamiltonian.hpp"
#include "tnqe/mps.hpp"
#include "tnqe/rotations.hpp"
#include "tnqe/subspace.hpp"

namespace tnqe {

// Subspace of M references with their orbital bases, plus the current
// ground-state estimate in that subspace.
struct TnqeState {
  std::vector<Mps> refs;
  RotationRegistry registry;
  Vector c;          // subspace coefficients, c^T S c = 1
  double e1 = 0.0;
  Charge sector;
  const SparseHamiltonian* h = nullptr;
  std::uint64_t qpu_calls = 0;
  std::uint64_t batches = 0;
  std::uint64_t noise_stream = 0;

  int m() const { return static_cast<int>(refs.size()); }
};

enum class RotationType { none, fswap, givens };
const char* to_string(RotationType r);

struct SolverSettings {
  double eps_sv = 1e-10;
  GeeMode mode = GeeMode::projection;
  double lin_dep_tol = 1e-3;
  double cond_max = 1e8;
};

struct ThetaSearch {
  int grid_points = 33;
  double tol = 1e-6;
};

struct SweepConfig {
  std::vector<int> jset;
  RotationType rotation = RotationType::none;
  int nreps = 2;
  double e_tol = 1e-3;
  int chi_max = 4;
  NoiseModel noise;
  SolverSettings solver;
  ThetaSearch theta;
  int jobs = 1;

  void validate() const;
};

struct BondRecord {
  int p = 0;
  double e_old = 0.0;
  double e_pencil = 0.0;  // two-site pencil, before truncation
  double e_new = 0.0;     // reduced M x M pencil after truncation
  bool accepted = false;
  bool skipped = false;
  std::vector<int> refs;       // jset order
  std::vector<double> xi;      // truncation error per jset reference
  std::vector<double> theta;   // accepted angle (givens) per jset reference
  std::vector<int> swapped;    // accepted fswap per jset reference
  int retained = 0;
  std::uint64_t qpu_calls = 0;
  double seconds = 0.0;
  std::string note;
};

struct SweepReport {
  std::vector<BondRecord> bonds;
  double e_final = 0.0;
  std::uint64_t qpu_calls = 0;
  double seconds = 0.0;
};

// Two-site tensor acted on by a d^2 x d^2 gate on its physical pair.
TwoSiteTensor apply_gate(const TwoSiteTensor& t, const Matrix& gate);

struct FswapTrial {
  bool accept = false;
  double xi = 0.0;
  double xi_swapped = 0.0;
  TwoSiteTensor swapped;
};
FswapTrial fswap_trial(const TwoSiteTensor& t, int chi_max);

struct ThetaResult {
  double theta = 0.0;
  double xi = 0.0;
};
ThetaResult optimize_theta(const TwoSiteTensor& t, int chi_max, const ThetaSearch& opt = {});

// Gate restricted to the basis tuples: G_mn = <m| gate |n>.
Matrix rotation_block_matrix(const Matrix& gate, const OneHotBasis& basis);

// Single-site expansion around a fixed neighbour. With free_left the site p
// varies and `fixed` is the right-orthogonal tensor at p+1; otherwise p+1
// varies and `fixed` is the left-orthogonal tensor at p. Rows of the
// returned matrix are orthonormal.
struct SingleSiteMap {
  Matrix t;  // single-site tuples x two-site tuples
  std::vector<std::array<int, 3>> tuples;
};
SingleSiteMap single_site_isometry(const OneHotBasis& basis, const SiteTensor& fixed,
                                   const std::vector<Charge>& mid, bool free_left);

// Whole-reference pencil (every block is a single reference), solved.
// Adds the assembly calls to the state's tally.
GeeSolution evaluate_state(TnqeState& state, const SweepConfig& cfg);

SweepReport generalized_sweep(TnqeState& state, const SweepConfig& cfg);

// Energy of sum_j c_j U_j |phi_j> computed from full statevectors.
double represented_energy(const TnqeState& state);

}  // namespace tnqe
