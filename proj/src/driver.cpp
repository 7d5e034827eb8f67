#include "tnqe/driver.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace tnqe {

const char* to_string(Variant v) {
  switch (v) {
    case Variant::lcmps: return "lcmps";
    case Variant::tnqe_f: return "tnqe_f";
    case Variant::tnqe_g: return "tnqe_g";
  }
  return "?";
}

const char* to_string(Ordering o) {
  switch (o) {
    case Ordering::given: return "given";
    case Ordering::random: return "random";
    case Ordering::fiedler_exchange: return "fiedler_exchange";
    case Ordering::mutual_information: return "mutual_information";
  }
  return "?";
}

Variant parse_variant(const std::string& s) {
  if (s == "lcmps") return Variant::lcmps;
  if (s == "tnqe_f") return Variant::tnqe_f;
  if (s == "tnqe_g") return Variant::tnqe_g;
  throw FormatError("unknown variant '" + s + "'");
}

Ordering parse_ordering(const std::string& s) {
  if (s == "given") return Ordering::given;
  if (s == "random") return Ordering::random;
  if (s == "fiedler_exchange" || s == "fiedler") return Ordering::fiedler_exchange;
  if (s == "mutual_information" || s == "mi") return Ordering::mutual_information;
  throw FormatError("unknown ordering '" + s + "'");
}

void RunParams::validate() const {
  if (m_max < 1) throw PreconditionError("m_max must be at least 1");
  if (chi_max < 1) throw PreconditionError("chi must be positive");
  if (ordering_chi < 1) throw PreconditionError("ordering_chi must be positive");
  if (ns1 < 0 || ns2 < 0 || dmrg_sweeps < 0) throw PreconditionError("sweep counts must be non-negative");
  if (noise.delta_h < 0 || noise.delta_s < 0) throw PreconditionError("noise levels must be non-negative");
  if (max_restarts < 1) throw PreconditionError("max_restarts must be at least 1");
  if (jobs < 1) throw PreconditionError("jobs must be at least 1");
}

SweepConfig RunParams::sweep_config() const {
  SweepConfig c;
  c.chi_max = chi_max;
  c.e_tol = e_tol;
  c.nreps = nreps;
  c.noise = noise;
  c.solver = solver;
  // Noisy pencils: cut directions whose overlap is within ~100x of the noise floor.
  const double floor = std::max(noise.delta_h, 10.0 * noise.delta_s);
  if (!eps_sv_set) c.solver.eps_sv = std::max(1e-10, 100.0 * floor);
  if (!lin_dep_set) c.solver.lin_dep_tol = std::max(solver.lin_dep_tol, 100.0 * floor);
  c.jobs = jobs;
  return c;
}

int ConvergenceTrace::sweeps() const {
  int n = 0;
  for (const auto& r : rows) n = std::max(n, r.sweep);
  return n;
}

double correlation_fraction(double e, double e_hf, double e_fci) {
  const double den = e_hf - e_fci;
  if (!(std::abs(den) > 1e-14)) throw NumericalError("correlation energy denominator vanishes");
  return (e_hf - e) / den;
}

std::vector<int> fiedler_order(const Matrix& w) {
  const int n = static_cast<int>(w.rows());
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  if (n <= 2) return perm;
  Matrix lap = Matrix::Zero(n, n);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      if (p == q) continue;
      lap(p, q) = -w(p, q);
      lap(p, p) += w(p, q);
    }
  Eigen::SelfAdjointEigenSolver<Matrix> es(lap);
  Vector f = es.eigenvectors().col(1);
  Eigen::Index imax;
  f.cwiseAbs().maxCoeff(&imax);
  if (f[imax] < 0) f = -f;
  std::stable_sort(perm.begin(), perm.end(), [&](int a, int b) { return f[a] < f[b]; });
  return perm;
}

namespace {

double von_neumann(const Matrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
  double s = 0.0;
  for (int i = 0; i < rho.rows(); ++i) {
    const double v = es.eigenvalues()(i);
    if (v > 1e-14) s -= v * std::log(v);
  }
  return s;
}

}  // namespace

Matrix orbital_mutual_information(const Vector& psi, int n) {
  const int nq = 2 * n;
  if (psi.size() != static_cast<Eigen::Index>(std::size_t{1} << nq))
    throw PreconditionError("vector is not over the full Fock space");
  auto local = [&](std::uint64_t x, int p) { return static_cast<int>((x >> (nq - 2 - 2 * p)) & 3); };
  auto with = [&](std::uint64_t x, int p, int k) {
    const int sh = nq - 2 - 2 * p;
    return (x & ~(std::uint64_t{3} << sh)) | (std::uint64_t(k) << sh);
  };
  auto count = [](int k) { return (k >> 1) + (k & 1); };
  std::vector<std::uint64_t> support;
  for (std::uint64_t x = 0; x < static_cast<std::uint64_t>(psi.size()); ++x)
    if (psi(x) != 0.0) support.push_back(x);

  std::vector<double> s1(n);
  for (int p = 0; p < n; ++p) {
    Matrix rho = Matrix::Zero(4, 4);
    for (auto x : support) rho(local(x, p), local(x, p)) += psi(x) * psi(x);
    s1[p] = von_neumann(rho);
  }
  Matrix mi = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Matrix rho = Matrix::Zero(16, 16);
      for (auto x : support) {
        const int a = local(x, i), b = local(x, j);
        int between = 0;
        for (int q = i + 1; q < j; ++q) between += count(local(x, q));
        for (int a2 = 0; a2 < 4; ++a2)
          for (int b2 = 0; b2 < 4; ++b2) {
            const std::uint64_t y = with(with(x, i, a2), j, b2);
            if (psi(y) == 0.0) continue;
            // Moving electrons between i and j past the sites in between.
            const int moved = count(a2) - count(a);
            const double sign = (moved * between) % 2 ? -1.0 : 1.0;
            rho(a * 4 + b, a2 * 4 + b2) += sign * psi(x) * psi(y);
          }
      }
      mi(i, j) = mi(j, i) = std::max(0.0, s1[i] + s1[j] - von_neumann(rho));
    }
  return mi;
}

std::vector<int> initial_ordering(const FermionIntegrals& ints, Ordering strategy, std::uint64_t seed, int chi) {
  const int n = ints.n_spatial;
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  if (strategy == Ordering::random) {
    CounterRng rng(seed);
    for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
  } else if (strategy == Ordering::fiedler_exchange) {
    Matrix w = Matrix::Zero(n, n);
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q)
        if (p != q) w(p, q) = std::abs(ints.eri(p, q, q, p));
    perm = fiedler_order(w);
  } else if (strategy == Ordering::mutual_information && n > 2) {
    if (n > 10) throw UnsupportedError("mutual-information ordering needs at most 10 orbitals");
    const SparseHamiltonian h = build_sparse_hamiltonian(ints, 4, ints.sector());
    TnqeState st;
    st.h = &h;
    st.sector = ints.sector();
    SweepConfig cfg;
    cfg.jset = {0};
    cfg.chi_max = chi;
    cfg.rotation = RotationType::none;
    st.refs.push_back(random_mps(n, 4, st.sector, chi, CounterRng::hash(seed, 0x6d69)));
    st.registry.add(Matrix::Identity(n, n));
    evaluate_state(st, cfg);
    for (int s = 0; s < 10; ++s) generalized_sweep(st, cfg);
    Vector psi = to_statevector(st.refs[0]);
    psi.normalize();
    perm = fiedler_order(orbital_mutual_information(psi, n));
  }
  return perm;
}

FermionIntegrals permute_orbitals(const FermionIntegrals& ints, const std::vector<int>& perm) {
  const int n = ints.n_spatial;
  if (static_cast<int>(perm.size()) != n) throw PreconditionError("permutation length mismatch");
  std::vector<int> seen(n, 0);
  for (int p : perm) {
    if (p < 0 || p >= n || seen[p]) throw PreconditionError("not a permutation");
    seen[p] = 1;
  }
  FermionIntegrals out = ints;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.h1(i, j) = ints.h1(perm[i], perm[j]);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          out.h2[((std::size_t(i) * n + j) * n + k) * n + l] = ints.eri(perm[i], perm[j], perm[k], perm[l]);
  return out;
}

namespace {

int rotation_events(const SweepReport& r) {
  int n = 0;
  for (const auto& b : r.bonds) {
    if (!b.accepted) continue;
    for (int s : b.swapped) n += s;
    for (double t : b.theta) n += (t != 0.0);
  }
  return n;
}

int accepted_bonds(const SweepReport& r) {
  int n = 0;
  for (const auto& b : r.bonds) n += b.accepted;
  return n;
}

}  // namespace

RunResult run_tnqe(const FermionIntegrals& ints, const RunParams& params, std::optional<double> e_fci,
                   const TraceCallback& on_row) {
  params.validate();
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  RunResult r;
  r.seed = params.seed;
  r.ordering = initial_ordering(ints, params.ordering, params.ordering_seed, params.ordering_chi);
  r.ints = permute_orbitals(ints, r.ordering);
  const Charge sector = r.ints.sector();
  r.hamiltonian = std::make_shared<SparseHamiltonian>(build_sparse_hamiltonian(r.ints, 4, sector));
  TnqeState& st = r.state;
  st.h = r.hamiltonian.get();
  st.sector = sector;
  const int n = r.ints.n_spatial;

  ConvergenceTrace& tr = r.trace;
  tr.label = ints.label;
  tr.variant = params.variant;
  tr.e_hf = hf_energy(r.ints);
  if (e_fci) {
    tr.e_fci = *e_fci;
    tr.has_fci = true;
  }

  const SweepConfig base = params.sweep_config();
  int sweep_index = 0;
  auto emit = [&](int stage, const char* phase, RotationType rot, const SweepReport* rep) {
    TraceRow row;
    row.stage = stage;
    row.sweep = sweep_index;
    row.phase = phase;
    row.rotation = rot;
    row.e1 = st.e1;
    row.e_exact = params.noise.enabled() ? represented_energy(st) : st.e1;
    row.corr_fraction = tr.has_fci ? correlation_fraction(row.e_exact, tr.e_hf, tr.e_fci) : 0.0;
    row.qpu_calls = st.qpu_calls;
    row.batches = st.batches;
    if (rep) {
      row.accepted_bonds = accepted_bonds(*rep);
      row.rotation_events = rotation_events(*rep);
    }
    row.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    tr.rows.push_back(row);
    if (on_row) on_row(row);
  };

  // Classical start: one reference, no rotations, exact matrix elements.
  SweepConfig classical = base;
  classical.noise = NoiseModel{};
  if (!params.eps_sv_set) classical.solver.eps_sv = 1e-10;
  if (!params.lin_dep_set) classical.solver.lin_dep_tol = params.solver.lin_dep_tol;
  classical.jset = {0};
  classical.rotation = RotationType::none;
  st.refs.push_back(random_mps(n, 4, sector, params.chi_max, CounterRng::hash(params.seed, 0)));
  st.registry.add(Matrix::Identity(n, n));
  evaluate_state(st, classical);
  for (int s = 0; s < params.dmrg_sweeps; ++s) generalized_sweep(st, classical);
  st.qpu_calls = 0;
  st.batches = 0;
  emit(1, "dmrg", RotationType::none, nullptr);

  const RotationType single_rot = params.variant == Variant::lcmps ? RotationType::none : RotationType::fswap;
  const RotationType even_rot = single_rot;
  const RotationType odd_rot = params.variant == Variant::tnqe_g ? RotationType::givens : single_rot;

  for (int m = 2; m <= params.m_max; ++m) {
    st.refs.push_back(random_mps(n, 4, sector, params.chi_max, CounterRng::hash(params.seed, m - 1)));
    st.registry.add(st.registry.u(m - 2));
    evaluate_state(st, base);

    SweepConfig cfg = base;
    cfg.jset = {m - 1};
    cfg.rotation = single_rot;
    for (int s = 0; s < params.ns1; ++s) {
      const SweepReport rep = generalized_sweep(st, cfg);
      ++sweep_index;
      emit(m, "single", cfg.rotation, &rep);
    }
    cfg.jset.resize(m);
    std::iota(cfg.jset.begin(), cfg.jset.end(), 0);
    for (int s = 0; s < params.ns2; ++s)
      for (RotationType rot : {even_rot, odd_rot}) {
        cfg.rotation = rot;
        const SweepReport rep = generalized_sweep(st, cfg);
        ++sweep_index;
        emit(m, "all", rot, &rep);
      }
  }
  return r;
}

RunResult run_with_restarts(const FermionIntegrals& ints, const RunParams& params, double e_fci,
                            double threshold, const TraceCallback& on_row) {
  std::optional<RunResult> best;
  double best_err = 0.0;
  for (int a = 0; a < params.max_restarts; ++a) {
    RunParams p = params;
    p.seed = params.seed + a;
    if (p.ordering == Ordering::random) p.ordering_seed = params.ordering_seed + a;
    RunResult r = run_tnqe(ints, p, e_fci, on_row);
    const double err = represented_energy(r.state) - e_fci;
    r.attempts = a + 1;
    if (!best || err < best_err) {
      best_err = err;
      best = std::move(r);
    }
    best->attempts = a + 1;
    if (best_err <= threshold) break;
  }
  return std::move(*best);
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

RunConfig parse_run_config(std::istream& in, const std::string& origin) {
  RunConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto where = origin + ":" + std::to_string(lineno) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError(where + "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (val.empty()) throw FormatError(where + "missing value for '" + key + "'");
    auto num = [&]() {
      std::size_t pos = 0;
      double v = 0;
      try {
        v = std::stod(val, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos != val.size()) throw FormatError(where + "'" + key + "' expects a number, got '" + val + "'");
      return v;
    };
    auto integer = [&]() {
      const double v = num();
      if (v != std::floor(v)) throw FormatError(where + "'" + key + "' expects an integer");
      return static_cast<long long>(v);
    };
    RunParams& p = c.params;
    try {
      if (key == "label" || key == "geometry") c.label = val;
      else if (key == "fcidump") c.fcidump = val;
      else if (key == "output_dir") c.output_dir = val;
      else if (key == "m_max") p.m_max = static_cast<int>(integer());
      else if (key == "chi" || key == "chi_max") p.chi_max = static_cast<int>(integer());
      else if (key == "ns1") p.ns1 = static_cast<int>(integer());
      else if (key == "ns2") p.ns2 = static_cast<int>(integer());
      else if (key == "dmrg_sweeps") p.dmrg_sweeps = static_cast<int>(integer());
      else if (key == "variant") p.variant = parse_variant(val);
      else if (key == "ordering") p.ordering = parse_ordering(val);
      else if (key == "ordering_seed") p.ordering_seed = static_cast<std::uint64_t>(integer());
      else if (key == "ordering_chi") p.ordering_chi = static_cast<int>(integer());
      else if (key == "seed") p.seed = static_cast<std::uint64_t>(integer());
      else if (key == "noise_seed") p.noise.seed = static_cast<std::uint64_t>(integer());
      else if (key == "delta_h") p.noise.delta_h = num();
      else if (key == "delta_s") p.noise.delta_s = num();
      else if (key == "eps_sv") {
        p.solver.eps_sv = num();
        p.eps_sv_set = true;
      } else if (key == "gee_mode") {
        if (val == "projection") p.solver.mode = GeeMode::projection;
        else if (val == "inversion") p.solver.mode = GeeMode::inversion;
        else throw FormatError("unknown gee_mode '" + val + "'");
      } else if (key == "lin_dep_tol") {
        p.solver.lin_dep_tol = num();
        p.lin_dep_set = true;
      } else if (key == "cond_max") p.solver.cond_max = num();
      else if (key == "e_tol") p.e_tol = num();
      else if (key == "nreps") p.nreps = static_cast<int>(integer());
      else if (key == "jobs") p.jobs = static_cast<int>(integer());
      else if (key == "max_restarts") p.max_restarts = static_cast<int>(integer());
      else throw FormatError("unknown key '" + key + "'");
    } catch (const FormatError& e) {
      const std::string msg = e.what();
      if (msg.rfind(origin, 0) == 0) throw;
      throw FormatError(where + msg);
    }
  }
  try {
    c.params.validate();
  } catch (const PreconditionError& e) {
    throw FormatError(origin + ": " + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config " + path);
  return parse_run_config(in, path);
}

void write_trace_csv_header(std::ostream& os) {
  os << "stage,sweep,phase,rotation,e1,e_exact,corr_fraction,qpu_calls,batches,accepted_bonds,rotation_events\n";
}

void write_trace_csv_row(const TraceRow& r, std::ostream& os) {
  os << r.stage << ',' << r.sweep << ',' << r.phase << ',' << to_string(r.rotation) << ','
     << std::setprecision(12) << std::fixed << r.e1 << ',' << r.e_exact << ',' << std::setprecision(8) << r.corr_fraction << ','
     << r.qpu_calls << ',' << r.batches << ',' << r.accepted_bonds << ',' << r.rotation_events << '\n';
  os.unsetf(std::ios::floatfield);
}

void write_trace_csv(const ConvergenceTrace& trace, std::ostream& os) {
  write_trace_csv_header(os);
  for (const auto& r : trace.rows) write_trace_csv_row(r, os);
}

std::string trace_json(const ConvergenceTrace& t) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["label"] = t.label;
  j["variant"] = to_string(t.variant);
  j["e_hf"] = t.e_hf;
  if (t.has_fci) j["e_fci"] = t.e_fci;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : t.rows)
    j["rows"].push_back({{"stage", r.stage},
                         {"sweep", r.sweep},
                         {"phase", r.phase},
                         {"rotation", to_string(r.rotation)},
                         {"e1", r.e1},
                         {"e_exact", r.e_exact},
                         {"corr_fraction", r.corr_fraction},
                         {"qpu_calls", r.qpu_calls},
                         {"batches", r.batches},
                         {"accepted_bonds", r.accepted_bonds},
                         {"rotation_events", r.rotation_events}});
  return j.dump(1);
}

}  // namespace tnqe
