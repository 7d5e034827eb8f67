#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tnqe/chem_io.hpp"
#include "tnqe/sweep.hpp"

namespace tnqe {

enum class Variant { lcmps, tnqe_f, tnqe_g };
enum class Ordering { given, random, fiedler_exchange, mutual_information };

const char* to_string(Variant v);
const char* to_string(Ordering o);
Variant parse_variant(const std::string& s);
Ordering parse_ordering(const std::string& s);

struct RunParams {
  int m_max = 4;
  int chi_max = 4;
  int ns1 = 4;
  int ns2 = 6;
  int dmrg_sweeps = 10;
  Variant variant = Variant::tnqe_g;
  Ordering ordering = Ordering::mutual_information;
  std::uint64_t ordering_seed = 1;
  int ordering_chi = 16;  // bond dimension of the mutual-information DMRG
  std::uint64_t seed = 1;
  NoiseModel noise;
  SolverSettings solver;
  bool eps_sv_set = false;  // otherwise derived from the noise level
  bool lin_dep_set = false;
  double e_tol = 1e-3;
  int nreps = 2;
  int jobs = 1;
  int max_restarts = 3;

  void validate() const;
  // Sweep settings shared by every stage.
  SweepConfig sweep_config() const;
};

struct TraceRow {
  int stage = 0;  // current M
  int sweep = 0;  // global index of quantum sweeps, 0 for the classical start
  std::string phase;  // dmrg, single, all
  RotationType rotation = RotationType::none;
  double e1 = 0.0;       // subspace estimate (noisy when the pencil is)
  double e_exact = 0.0;  // energy of the represented state
  double corr_fraction = 0.0;
  std::uint64_t qpu_calls = 0;
  std::uint64_t batches = 0;
  int accepted_bonds = 0;
  int rotation_events = 0;
  double seconds = 0.0;
};

struct ConvergenceTrace {
  std::string label;
  Variant variant = Variant::tnqe_g;
  double e_hf = 0.0;
  double e_fci = 0.0;
  bool has_fci = false;
  std::vector<TraceRow> rows;
  int sweeps() const;
};

double correlation_fraction(double e, double e_hf, double e_fci);

// mutual_information runs a short classical DMRG at bond dimension `chi`
// in the given order and sorts by the Fiedler vector of the orbital mutual
// information of that state.
std::vector<int> initial_ordering(const FermionIntegrals& ints, Ordering strategy,
                                  std::uint64_t seed = 1, int chi = 4);
// Sites sorted by the Fiedler vector of the weighted graph (sign fixed so
// the largest component is positive).
std::vector<int> fiedler_order(const Matrix& weights);
// I_pq = S_p + S_q - S_pq from one- and two-orbital reduced density
// matrices of a full Fock-space vector (d=4 sites).
Matrix orbital_mutual_information(const Vector& psi, int n_spatial);
// Integrals with site i holding original orbital perm[i].
FermionIntegrals permute_orbitals(const FermionIntegrals& ints, const std::vector<int>& perm);

struct RunResult {
  FermionIntegrals ints;  // in the chosen ordering
  std::vector<int> ordering;
  std::shared_ptr<SparseHamiltonian> hamiltonian;
  TnqeState state;
  ConvergenceTrace trace;
  std::uint64_t seed = 0;
  int attempts = 1;
};

using TraceCallback = std::function<void(const TraceRow&)>;

// Reference energies are optional; when e_fci is absent the correlation
// fraction is left at zero.
RunResult run_tnqe(const FermionIntegrals& ints, const RunParams& params,
                   std::optional<double> e_fci = std::nullopt, const TraceCallback& on_row = {});

// Retries with consecutive seeds until the final energy is within
// `threshold` of e_fci or max_restarts runs were made. Returns the best run.
RunResult run_with_restarts(const FermionIntegrals& ints, const RunParams& params, double e_fci,
                            double threshold = 1.6e-3, const TraceCallback& on_row = {});

// Key-value run configuration ("key = value", '#' comments).
struct RunConfig {
  std::string label;
  std::string fcidump;
  std::string output_dir = ".";
  RunParams params;
};
RunConfig parse_run_config(std::istream& in, const std::string& origin = "<config>");
RunConfig load_run_config(const std::string& path);

void write_trace_csv(const ConvergenceTrace& trace, std::ostream& os);
void write_trace_csv_header(std::ostream& os);
void write_trace_csv_row(const TraceRow& row, std::ostream& os);
std::string trace_json(const ConvergenceTrace& trace);

}  // namespace tnqe
