#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tnqe/chem_io.hpp"
#include "tnqe/circuits.hpp"
#include "tnqe/dequantize.hpp"
#include "tnqe/driver.hpp"
#include "tnqe/hamiltonian.hpp"
#include "tnqe/resources.hpp"

namespace fs = std::filesystem;
using namespace tnqe;

namespace {

// Full-space FCI is affordable up to this many spatial orbitals.
constexpr int kFciMaxOrbitals = 10;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

FermionIntegrals load_checked(const std::string& path) {
  if (!fs::exists(path)) throw InputError("no such file: " + path);
  return load_fcidump(path);
}

std::optional<Charge> sector_of(const FermionIntegrals& ints, int n_el, int ms2) {
  if (n_el < 0) return ints.sector();
  return sector_from(n_el, ms2);
}

int cmd_fci(const std::string& path, int n_el, int ms2) {
  const FermionIntegrals ints = load_checked(path);
  if (ints.n_spatial > kFciMaxOrbitals) throw InputError("too many orbitals for exact diagonalization");
  const auto h = build_sparse_hamiltonian(ints, 4, sector_of(ints, n_el, ms2));
  const GroundState gs = fci_ground_state(h);
  const double ehf = hf_energy(ints);
  std::printf("orbitals     %d\nelectrons    %d\nsector_dim   %zu\n", ints.n_spatial, ints.n_electrons, h.dim());
  std::printf("E_HF         %.12f\nE_FCI        %.12f\nE_corr       %.12f\n", ehf, gs.energy, gs.energy - ehf);
  return 0;
}

void write_plot_script(const fs::path& path, const std::string& csv, bool has_fci, double e_fci) {
  std::ofstream os(path);
  os << "# gnuplot " << path.filename().string() << "\n";
  os << "set datafile separator ','\nset key autotitle columnhead\nset xlabel 'sweep'\n";
  if (has_fci) {
    os << "set logscale y\nset ylabel 'E - E_FCI (Ha)'\n";
    os << "set arrow from graph 0, first 1.6e-3 to graph 1, first 1.6e-3 nohead dt 2\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12f", e_fci);
    os << "plot '" << csv << "' using 2:($6 - (" << buf << ")) with linespoints title 'error'\n";
  } else {
    os << "set ylabel 'E (Ha)'\nplot '" << csv << "' using 2:6 with linespoints title 'energy'\n";
  }
}

void write_snapshot(const RunResult& r, const fs::path& dir, const std::string& label) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["label"] = label;
  j["seed"] = r.seed;
  j["attempts"] = r.attempts;
  j["ordering"] = r.ordering;
  j["energy"] = r.state.e1;
  j["energy_exact"] = represented_energy(r.state);
  j["coefficients"] = std::vector<double>(r.state.c.data(), r.state.c.data() + r.state.c.size());
  auto& refs = j["references"];
  refs = nlohmann::json::array();
  for (int a = 0; a < r.state.m(); ++a) {
    const std::string name = label + ".ref" + std::to_string(a) + ".mps";
    save_mps(r.state.refs[a], dir / name);
    const Matrix& u = r.state.registry.u(a);
    std::vector<double> flat(u.data(), u.data() + u.size());
    refs.push_back({{"mps", name}, {"rotation_col_major", flat}, {"n", u.rows()}});
  }
  std::ofstream(dir / (label + ".state.json")) << j.dump(1) << "\n";
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed, std::optional<std::string> out,
            int jobs, bool no_fci, bool quiet) {
  if (!fs::exists(config_path)) throw InputError("no such file: " + config_path);
  RunConfig cfg = load_run_config(config_path);
  if (seed) cfg.params.seed = *seed;
  if (out) cfg.output_dir = *out;
  if (jobs > 0) cfg.params.jobs = jobs;
  if (cfg.fcidump.empty()) throw InputError(config_path + ": missing key 'fcidump'");
  fs::path dump = cfg.fcidump;
  if (dump.is_relative() && !fs::exists(dump)) dump = fs::path(config_path).parent_path() / dump;
  const FermionIntegrals ints = load_checked(dump.string());
  const std::string label = cfg.label.empty() ? fs::path(config_path).stem().string() : cfg.label;
  const fs::path dir = cfg.output_dir;
  fs::create_directories(dir);

  std::optional<double> e_fci;
  if (!no_fci && ints.n_spatial <= kFciMaxOrbitals) {
    const auto h = build_sparse_hamiltonian(ints, 4, ints.sector());
    e_fci = fci_ground_state(h).energy;
  }

  // Rows go to the partial file as they arrive; the final CSV holds the
  // returned run only.
  const fs::path partial = dir / (label + ".partial.csv");
  std::ofstream live;
  auto on_row = [&](const TraceRow& row) {
    if (row.phase == "dmrg" || !live.is_open()) {
      live.close();
      live.open(partial, std::ios::trunc);
      write_trace_csv_header(live);
    }
    write_trace_csv_row(row, live);
    live.flush();
    if (!quiet)
      std::fprintf(stderr, "M=%d sweep=%d %-6s %-6s E=%.10f exact=%.10f calls=%llu\n", row.stage, row.sweep,
                   row.phase.c_str(), to_string(row.rotation), row.e1, row.e_exact,
                   static_cast<unsigned long long>(row.qpu_calls));
  };

  const RunResult r = e_fci ? run_with_restarts(ints, cfg.params, *e_fci, 1.6e-3, on_row)
                            : run_tnqe(ints, cfg.params, std::nullopt, on_row);
  live.close();

  const std::string csv = label + ".trace.csv";
  {
    std::ofstream os(dir / csv);
    write_trace_csv(r.trace, os);
  }
  fs::remove(partial);
  std::ofstream(dir / (label + ".trace.json")) << trace_json(r.trace) << "\n";
  write_snapshot(r, dir, label);

  const double dh = cfg.params.noise.delta_h > 0 ? cfg.params.noise.delta_h : 1e-4;
  const double ds = cfg.params.noise.delta_s > 0 ? cfg.params.noise.delta_s : 1e-5;
  const ResourceReport rep = tally(r.trace, ints, dh, ds, 6);
  std::ofstream(dir / (label + ".resources.json")) << report_json(rep) << "\n";
  std::ofstream(dir / (label + ".resources.txt")) << report_table(rep);
  write_plot_script(dir / (label + ".plot.gp"), csv, e_fci.has_value(), e_fci.value_or(0.0));

  std::printf("label        %s\nvariant      %s\nseed         %llu\nattempts     %d\n", label.c_str(),
              to_string(cfg.params.variant), static_cast<unsigned long long>(r.seed), r.attempts);
  const double e_exact = represented_energy(r.state);
  std::printf("E            %.12f\n", r.state.e1);
  if (cfg.params.noise.enabled()) std::printf("E_exact      %.12f\n", e_exact);
  if (e_fci) {
    std::printf("E_FCI        %.12f\nerror        %.3e\ncorr_frac    %.4f\n", *e_fci, e_exact - *e_fci,
                correlation_fraction(e_exact, r.trace.e_hf, *e_fci));
  }
  std::printf("qpu_calls    %llu\nbatches      %llu\n", static_cast<unsigned long long>(r.state.qpu_calls),
              static_cast<unsigned long long>(r.state.batches));
  if (!std::isfinite(r.state.e1) || !std::isfinite(e_exact)) return 1;
  return 0;
}

struct EstimateArgs {
  int n_spatial = 6;
  int layers = 6;
  double delta_h = 1e-4;
  double delta_s = 1e-5;
  double l1 = -1.0;
  std::string fcidump;
  double qpu_calls = 0.0;
  double batches = 0.0;
  bool published = false;
  int sweeps = 48;
  bool json = false;
};

int cmd_estimate(const EstimateArgs& a) {
  double l1 = a.l1;
  int n = a.n_spatial;
  if (!a.fcidump.empty()) {
    const FermionIntegrals ints = load_checked(a.fcidump);
    l1 = spatial_l1_norm(ints);
    n = ints.n_spatial;
  }
  if (l1 < 0) throw InputError("give --l1 or --fcidump");
  ResourceReport r;
  if (a.published) {
    r = published_schedule(n, l1, a.sweeps, a.layers, a.delta_h, a.delta_s);
  } else {
    ResourceInputs in;
    in.n_spatial = n;
    in.d_layers = a.layers;
    in.delta_h = a.delta_h;
    in.delta_s = a.delta_s;
    in.l1_norm = l1;
    in.qpu_calls = a.qpu_calls;
    in.batches = a.batches;
    r = estimate_resources(in);
  }
  if (a.json) {
    std::cout << report_json(r) << "\n";
  } else {
    std::printf("l1 = %.4f\n", l1);
    std::cout << report_table(r);
  }
  return 0;
}

struct OverlapArgs {
  int sites = 6;
  int d = 4;
  int chi = 4;
  int swaps = 4;
  bool identical = false;
  int batches = 30;
  int samples = 2000;
  std::uint64_t seed = 1;
  int jobs = 1;
};

int cmd_sample_overlap(const OverlapArgs& a) {
  if (a.d != 2 && a.d != 4) throw InputError("--d must be 2 or 4");
  const int nq = a.d == 4 ? 2 * a.sites : a.sites;
  const Charge sector = sector_from(nq / 2, 0);
  const Mps mi = random_mps(a.sites, a.d, sector, a.chi, CounterRng::hash(a.seed, 0));
  const Mps mj = a.identical ? mi : random_mps(a.sites, a.d, sector, a.chi, CounterRng::hash(a.seed, 1));
  GivensNetwork net;
  net.n = a.sites;
  net.d = a.d;
  if (!a.identical) {
    CounterRng rng(CounterRng::hash(a.seed, 2));
    for (int g = 0; g < a.swaps; ++g)
      net.gates.push_back({static_cast<int>(rng.next_u64() % (a.sites - 1)), 0.0, GateKind::fswap});
  }
  const auto est = overlap_sampled_batches(mi, mj, net, a.batches, a.samples, a.seed, a.jobs);
  double mean = 0.0;
  for (const auto& e : est) mean += e.estimate;
  mean /= est.size();
  double var = 0.0;
  for (const auto& e : est) var += (e.estimate - mean) * (e.estimate - mean);
  const double se = est.size() > 1 ? std::sqrt(var / (est.size() - 1) / est.size()) : 0.0;

  Vector vi = to_statevector(mi), vj = to_statevector(mj);
  vi.normalize();
  vj.normalize();
  apply_rotation_network(vj, net);
  const double exact = vi.dot(vj);
  std::printf("estimate     %.8f\nstderr       %.3e\nexact        %.8f\nz            %.2f\n", mean, se, exact,
              se > 0 ? (mean - exact) / se : 0.0);
  return 0;
}

struct CompileArgs {
  int qubits = 8;
  int chi = 2;
  int layers = 1;
  int reopt = 10;
  int final_iters = 0;
  double stop = 1e-12;
  std::uint64_t seed = 1;
  std::string netlist;
};

int cmd_compile(const CompileArgs& a) {
  const Mps m = random_mps(a.qubits, 2, sector_from(a.qubits / 2, a.qubits % 2), a.chi, a.seed);
  const CompileResult r = disentangler_compile(m, a.layers, a.reopt, a.stop, a.final_iters);
  for (std::size_t l = 0; l < r.fidelity_per_layer.size(); ++l)
    std::printf("layer %zu      fidelity %.12f\n", l + 1, r.fidelity_per_layer[l]);
  std::printf("fidelity     %.12f\ninfidelity   %.3e\ncnots        %d\n", r.fidelity, 1.0 - r.fidelity,
              r.netlist.two_qubit_count());
  if (!a.netlist.empty()) {
    std::ofstream os(a.netlist);
    if (!os) throw InputError("cannot write " + a.netlist);
    write_netlist(r.netlist, os);
  }
  return 0;
}

int cmd_entangle_demo(int n) {
  if (n < 2 || n % 2 != 0 || n > 24) throw InputError("--qubits must be even and at most 24");
  const GivensNetwork net = max_entanglement_network(n);
  const int half = n / 2;
  Vector psi = Vector::Zero(std::size_t{1} << n);
  psi(((std::size_t{1} << half) - 1) << half) = 1.0;  // first half occupied
  apply_rotation_network(psi, net);
  const std::size_t dim = std::size_t{1} << half;
  const Matrix m = Eigen::Map<const Eigen::Matrix<double, -1, -1, Eigen::RowMajor>>(psi.data(), dim, dim);
  const Vector s = Eigen::JacobiSVD<Matrix>(m).singularValues();
  int rank = 0;
  double entropy = 0.0;
  for (int i = 0; i < s.size(); ++i) {
    if (s(i) > 1e-10) ++rank;
    const double p = s(i) * s(i);
    if (p > 1e-300) entropy -= p * std::log(p);
  }
  std::printf("qubits       %d\ngates        %zu\nschmidt_rank %d\nentropy      %.12f\nexpected     %.12f\n", n,
              net.gates.size(), rank, entropy, half * std::log(2.0));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tensor-network quantum eigensolver"};
  app.require_subcommand(1);
  int jobs = 0;
  app.add_option("--jobs", jobs, "Worker threads (0 keeps the config value)")->check(CLI::NonNegativeNumber);

  auto* fci = app.add_subcommand("fci", "HF and exact ground-state energies");
  std::string fci_path;
  int fci_nel = -1, fci_ms2 = 0;
  fci->add_option("fcidump", fci_path)->required();
  fci->add_option("--electrons", fci_nel, "Electron count (default from file)");
  fci->add_option("--ms2", fci_ms2, "2*Sz");

  auto* run = app.add_subcommand("run", "Run the eigensolver from a config file");
  run->alias("tnqe");
  std::string run_cfg, run_out;
  std::uint64_t run_seed = 0;
  bool no_fci = false, quiet = false;
  run->add_option("config", run_cfg)->required();
  auto* seed_opt = run->add_option("--seed", run_seed);
  auto* out_opt = run->add_option("-o,--output-dir", run_out);
  run->add_flag("--no-fci", no_fci, "Skip the exact reference");
  run->add_flag("-q,--quiet", quiet);

  auto* est = app.add_subcommand("estimate", "Quantum resource estimate");
  EstimateArgs ea;
  est->add_option("-n,--orbitals", ea.n_spatial);
  est->add_option("-D,--layers", ea.layers);
  est->add_option("--delta-h", ea.delta_h);
  est->add_option("--delta-s", ea.delta_s);
  est->add_option("--l1", ea.l1);
  est->add_option("--fcidump", ea.fcidump);
  est->add_option("--qpu-calls", ea.qpu_calls);
  est->add_option("--batches", ea.batches);
  est->add_flag("--published-schedule", ea.published, "Use the published call count and sweep schedule");
  est->add_option("--sweeps", ea.sweeps);
  est->add_flag("--json", ea.json);

  auto* so = app.add_subcommand("sample-overlap", "Sampled overlap of random MPS pairs");
  OverlapArgs oa;
  so->add_option("--sites", oa.sites);
  so->add_option("--d", oa.d);
  so->add_option("--chi", oa.chi);
  so->add_option("--swaps", oa.swaps);
  so->add_flag("--identical", oa.identical);
  so->add_option("--batches", oa.batches);
  so->add_option("--samples", oa.samples);
  so->add_option("--seed", oa.seed);

  auto* comp = app.add_subcommand("compile", "Disentangler compilation of a random MPS");
  CompileArgs ca;
  comp->add_option("--qubits", ca.qubits);
  comp->add_option("--chi", ca.chi);
  comp->add_option("-D,--layers", ca.layers);
  comp->add_option("--reopt", ca.reopt, "Re-optimization sweeps after each layer");
  comp->add_option("--final-sweeps", ca.final_iters, "Extra sweeps after the last layer");
  comp->add_option("--stop", ca.stop, "Target infidelity for early exit");
  comp->add_option("--seed", ca.seed);
  comp->add_option("--netlist", ca.netlist, "Write the gate list here");

  auto* ent = app.add_subcommand("entangle-demo", "Maximal-entanglement rotation network");
  int ent_n = 8;
  ent->add_option("--qubits", ent_n);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*fci) return cmd_fci(fci_path, fci_nel, fci_ms2);
    if (*run)
      return cmd_run(run_cfg, *seed_opt ? std::optional<std::uint64_t>(run_seed) : std::nullopt,
                     *out_opt ? std::optional<std::string>(run_out) : std::nullopt, jobs, no_fci, quiet);
    if (*est) return cmd_estimate(ea);
    if (*so) {
      oa.jobs = std::max(1, jobs);
      return cmd_sample_overlap(oa);
    }
    if (*comp) return cmd_compile(ca);
    if (*ent) return cmd_entangle_demo(ent_n);
  } catch (const InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const PreconditionError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failed: %s\n", e.what());
    return 1;
  }
  return 0;
}
