#include <gtest/gtest.h>

#include <sstream>

#include "helpers.hpp"
#include "tnqe/driver.hpp"

using namespace tnqe;
using namespace tnqe::test;

namespace {

std::string csv_of(const RunResult& r) {
  std::ostringstream os;
  write_trace_csv(r.trace, os);
  return os.str();
}

RunParams small_params(Variant v) {
  RunParams p;
  p.variant = v;
  p.m_max = 3;
  p.chi_max = 2;
  p.ns1 = 1;
  p.ns2 = 2;
  p.ordering = Ordering::given;
  return p;
}

}  // namespace

TEST(Config, ParsesKeysAndComments) {
  std::istringstream in("# comment\nlabel = h6\nchi = 3\nm_max=6\nvariant = tnqe_f\ndelta_h = 1e-4\nordering = mi\n");
  const RunConfig c = parse_run_config(in, "x.cfg");
  EXPECT_EQ(c.label, "h6");
  EXPECT_EQ(c.params.chi_max, 3);
  EXPECT_EQ(c.params.m_max, 6);
  EXPECT_EQ(c.params.variant, Variant::tnqe_f);
  EXPECT_EQ(c.params.ordering, Ordering::mutual_information);
  EXPECT_DOUBLE_EQ(c.params.noise.delta_h, 1e-4);
}

TEST(Config, ErrorsCarryOriginAndLine) {
  const char* bad[] = {"chi = 3\nbogus = 1\n", "chi = three\n", "chi 3\n", "chi = 2.5\n", "variant = vqe\n"};
  for (const char* text : bad) {
    std::istringstream in(text);
    try {
      parse_run_config(in, "run.cfg");
      ADD_FAILURE() << text;
    } catch (const FormatError& e) {
      EXPECT_EQ(std::string(e.what()).rfind("run.cfg:", 0), 0u) << e.what();
    }
  }
  std::istringstream neg("chi = 0\n");
  EXPECT_THROW(parse_run_config(neg, "run.cfg"), FormatError);
  EXPECT_THROW(load_run_config("/nonexistent/run.cfg"), FormatError);
}

TEST(Ordering, FiedlerOrderRecoversAChain) {
  const std::vector<int> chain = {3, 0, 4, 1, 5, 2};
  Matrix w = Matrix::Zero(6, 6);
  for (int i = 0; i + 1 < 6; ++i) w(chain[i], chain[i + 1]) = w(chain[i + 1], chain[i]) = 1.0 + 0.1 * i;
  std::vector<int> got = fiedler_order(w);
  if (got.front() != chain.front()) std::reverse(got.begin(), got.end());
  EXPECT_EQ(got, chain);
}

TEST(Ordering, MutualInformationOfProductStateVanishes) {
  const Mps m = basis_state_mps(4, {3, 2, 1, 0});
  const Matrix mi = orbital_mutual_information(to_statevector(m), 4);
  EXPECT_LT(mi.cwiseAbs().maxCoeff(), 1e-12);
  // A singlet pair over orbitals 0 and 1.
  Vector psi = Vector::Zero(1 << 6);
  psi[0b100100] = psi[0b011000] = std::sqrt(0.5);
  const Matrix mi2 = orbital_mutual_information(psi, 3);
  EXPECT_NEAR(mi2(0, 1), 2.0 * std::log(2.0), 1e-12);
  EXPECT_NEAR(mi2(0, 2), 0.0, 1e-12);
}

TEST(Ordering, StrategiesAreDeterministicPermutations) {
  const FermionIntegrals ints = random_integrals(5, 4, 111);
  for (Ordering o : {Ordering::given, Ordering::random, Ordering::fiedler_exchange, Ordering::mutual_information}) {
    const auto a = initial_ordering(ints, o, 3, 4);
    EXPECT_EQ(a, initial_ordering(ints, o, 3, 4));
    std::vector<int> s = a;
    std::sort(s.begin(), s.end());
    EXPECT_EQ(s, (std::vector<int>{0, 1, 2, 3, 4})) << to_string(o);
  }
  EXPECT_EQ(initial_ordering(ints, Ordering::given), (std::vector<int>{0, 1, 2, 3, 4}));
  EXPECT_THROW(initial_ordering(random_integrals(11, 2, 1), Ordering::mutual_information), UnsupportedError);
}

TEST(Ordering, PermutationPreservesSpectrum) {
  const FermionIntegrals ints = random_integrals(4, 4, 112);
  const FermionIntegrals p = permute_orbitals(ints, {2, 0, 3, 1});
  const double e0 = fci_ground_state(build_sparse_hamiltonian(ints, 4, ints.sector())).energy;
  const double e1 = fci_ground_state(build_sparse_hamiltonian(p, 4, p.sector())).energy;
  EXPECT_NEAR(e0, e1, 1e-10);
}

TEST(Driver, H2SingleReferenceIsExact) {
  const FermionIntegrals ints = load_fcidump(data_path("h2_0.7414.FCIDUMP"));
  const double e_fci = fci_ground_state(build_sparse_hamiltonian(ints, 4, ints.sector())).energy;
  RunParams p;
  p.m_max = 1;
  p.chi_max = 4;
  const RunResult r = run_tnqe(ints, p, e_fci);
  EXPECT_NEAR(r.state.e1, e_fci, 1e-8);
  EXPECT_NEAR(r.trace.rows.back().corr_fraction, 1.0, 1e-6);
  EXPECT_EQ(r.trace.rows.back().qpu_calls, 0u);
}

TEST(Driver, VariantsAndRotationEvents) {
  const FermionIntegrals ints = random_integrals(4, 4, 113);
  int events[3] = {0, 0, 0};
  int i = 0;
  for (Variant v : {Variant::lcmps, Variant::tnqe_f, Variant::tnqe_g}) {
    const RunResult r = run_tnqe(ints, small_params(v));
    for (const auto& row : r.trace.rows) events[i] += row.rotation_events;
    EXPECT_EQ(r.state.m(), 3);
    EXPECT_NEAR(represented_energy(r.state), r.state.e1, 1e-8);
    ++i;
  }
  EXPECT_EQ(events[0], 0);
}

TEST(Driver, TraceIsReproducibleAcrossJobs) {
  const FermionIntegrals ints = random_integrals(4, 4, 114);
  RunParams p = small_params(Variant::tnqe_g);
  p.noise.delta_h = 1e-4;
  p.noise.delta_s = 1e-5;
  const std::string a = csv_of(run_tnqe(ints, p));
  p.jobs = 3;
  const std::string b = csv_of(run_tnqe(ints, p));
  EXPECT_EQ(a, b);
  p.seed = 2;
  EXPECT_NE(a, csv_of(run_tnqe(ints, p)));
}

TEST(Driver, CountersAreMonotone) {
  const FermionIntegrals ints = random_integrals(4, 4, 115);
  const RunResult r = run_tnqe(ints, small_params(Variant::tnqe_g));
  for (std::size_t k = 1; k < r.trace.rows.size(); ++k) {
    EXPECT_GE(r.trace.rows[k].qpu_calls, r.trace.rows[k - 1].qpu_calls);
    EXPECT_GE(r.trace.rows[k].batches, r.trace.rows[k - 1].batches);
  }
  EXPECT_GT(r.trace.rows.back().qpu_calls, 0u);
  EXPECT_EQ(r.trace.sweeps(), r.trace.rows.back().sweep);
}

TEST(Driver, CorrelationFraction) {
  EXPECT_DOUBLE_EQ(correlation_fraction(-1.0, -1.0, -2.0), 0.0);
  EXPECT_DOUBLE_EQ(correlation_fraction(-2.0, -1.0, -2.0), 1.0);
  EXPECT_DOUBLE_EQ(correlation_fraction(-1.5, -1.0, -2.0), 0.5);
}
