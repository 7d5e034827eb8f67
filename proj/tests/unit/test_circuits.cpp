#include <gtest/gtest.h>

#include <sstream>

#include "helpers.hpp"
#include "tnqe/circuits.hpp"

using namespace tnqe;
using namespace tnqe::test;

namespace {

// Branches of a state whose last qubit is the ancilla.
Vector branch(const Vector& psi, int a) {
  Vector out(psi.size() / 2);
  for (Eigen::Index s = 0; s < out.size(); ++s) out[s] = psi[2 * s + a];
  return out;
}

Netlist random_netlist(int nq, int n_gates, CounterRng& rng) {
  Netlist net;
  net.n_qubits = nq;
  for (int g = 0; g < n_gates; ++g) {
    const int det = rng.below(2) ? 1 : -1;
    if (rng.below(4) == 0) {
      net.gates.push_back({static_cast<int>(rng.below(nq)), -1, random_orthogonal(2, rng, det), -1});
      continue;
    }
    int a = static_cast<int>(rng.below(nq)), b = static_cast<int>(rng.below(nq - 1));
    if (b >= a) ++b;
    net.gates.push_back({a, b, random_orthogonal(4, rng, det), -1});
  }
  return net;
}

}  // namespace

TEST(Circuits, ControlledLiftOnRandomGates) {
  CounterRng rng(101);
  const int nq = 3;
  int negative = 0;
  for (int t = 0; t < 1000; ++t) {
    const Netlist net = random_netlist(nq, 1, rng);
    if (net.gates[0].m.determinant() < 0) ++negative;
    const Netlist lifted = controlled_lift(net);
    ASSERT_EQ(lifted.n_qubits, nq + 1);
    for (const auto& g : lifted.gates)
      if (g.two_qubit() && g.control < 0) {
        ASSERT_LT((g.m.transpose() * g.m - Matrix::Identity(4, 4)).norm(), 1e-12);
      }
    const Vector psi = random_matrix(1 << (nq + 1), 1, rng).normalized();
    Vector out = psi;
    apply_netlist(out, nq + 1, lifted);
    Vector want1 = branch(psi, 1);
    apply_netlist(want1, nq, net);
    ASSERT_LT((branch(out, 0) - branch(psi, 0)).norm(), 1e-12) << t;
    ASSERT_LT((branch(out, 1) - want1).norm(), 1e-12) << t;
  }
  EXPECT_GT(negative, 300);
}

TEST(Circuits, InverseUndoesNetlist) {
  CounterRng rng(102);
  const Netlist net = random_netlist(4, 12, rng);
  const Vector psi = random_matrix(16, 1, rng).normalized();
  Vector x = psi;
  apply_netlist(x, 4, net);
  apply_netlist_inverse(x, 4, net);
  EXPECT_LT((x - psi).norm(), 1e-12);
}

TEST(Circuits, HadamardTestMatchesOracle) {
  CounterRng rng(103);
  const char letters[] = "IXYZ";
  for (int t = 0; t < 40; ++t) {
    const int n_orb = 1 + static_cast<int>(rng.below(3));
    const int nq = 2 * n_orb;
    const Netlist ui = random_netlist(nq, 6, rng), uj = random_netlist(nq, 6, rng);
    GivensNetwork g = givens_decompose(random_orthogonal(n_orb, rng, 0));
    std::string pauli;
    for (int q = 0; q < nq; ++q) pauli += letters[rng.below(4)];
    const double got = hadamard_test(ui, uj, t % 3 ? &g : nullptr, pauli);

    Vector a = prepare_state(ui);
    if (t % 3) apply_rotation_network(a, g);
    int ny = 0;
    for (int q = 0; q < nq; ++q) {
      Matrix m(2, 2);
      switch (pauli[q]) {
        case 'I': continue;
        case 'X': m << 0, 1, 1, 0; break;
        case 'Z': m << 1, 0, 0, -1; break;
        default: m << 0, -1, 1, 0; ++ny; break;
      }
      apply_gate(a, nq, {q, -1, m, -1});
    }
    const double want = ny % 2 ? 0.0 : (ny % 4 ? -1.0 : 1.0) * prepare_state(uj).dot(a);
    EXPECT_NEAR(got, want, 1e-10) << pauli;
  }
}

TEST(Circuits, BondTwoMpsIsExactAtDepthOne) {
  CounterRng rng(104);
  const Mps mps = mps_from_statevector(random_matrix(64, 1, rng).col(0), 6, 2, 2);
  Vector want = to_statevector(mps);
  want /= want.norm();
  EXPECT_NEAR(std::abs(prepare_state(staircase_from_mps(mps)).dot(want)), 1.0, 1e-10);
  const CompileResult r = disentangler_compile(mps, 1);
  EXPECT_GT(r.fidelity, 1.0 - 1e-10);
  EXPECT_EQ(r.layers, 1);
}

TEST(Circuits, DisentanglerImprovesWithDepth) {
  CounterRng rng(106);
  const Vector psi = random_matrix(256, 1, rng).normalized();
  const CompileResult r1 = disentangler_compile(psi, 8, 1, 5);
  const CompileResult r4 = disentangler_compile(psi, 8, 4, 5);
  EXPECT_GE(r4.fidelity, r1.fidelity - 1e-12);
  EXPECT_NEAR(r4.fidelity, std::pow(prepare_state(r4.netlist).dot(psi), 2), 1e-10);
}

TEST(Circuits, NetlistTextRoundTrip) {
  CounterRng rng(107);
  Netlist net = controlled_lift(random_netlist(3, 5, rng));
  std::stringstream ss;
  write_netlist(net, ss);
  const Netlist back = read_netlist(ss);
  ASSERT_EQ(back.gates.size(), net.gates.size());
  EXPECT_EQ(back.n_qubits, net.n_qubits);
  for (std::size_t i = 0; i < net.gates.size(); ++i) {
    EXPECT_EQ(back.gates[i].q0, net.gates[i].q0);
    EXPECT_EQ(back.gates[i].q1, net.gates[i].q1);
    EXPECT_EQ(back.gates[i].control, net.gates[i].control);
    EXPECT_EQ(back.gates[i].m, net.gates[i].m);
  }
  std::stringstream bad("qubits 2\n0 1 0.5 0\n");
  EXPECT_THROW(read_netlist(bad), FormatError);
}

TEST(Circuits, ValidateRejectsNonOrthogonal) {
  Netlist net;
  net.n_qubits = 2;
  net.gates.push_back({0, 1, 2.0 * Matrix::Identity(4, 4), -1});
  EXPECT_THROW(net.validate(), PreconditionError);
  net.gates[0] = {0, 0, Matrix::Identity(4, 4), -1};
  EXPECT_THROW(net.validate(), PreconditionError);
}
