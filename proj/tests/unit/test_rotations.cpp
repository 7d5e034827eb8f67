#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "tnqe/hamiltonian.hpp"
#include "tnqe/mps.hpp"
#include "tnqe/rotations.hpp"

using namespace tnqe;
using namespace tnqe::test;

TEST(Givens, RoundTripOverRandomOrthogonals) {
  CounterRng rng(1);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int n = 2 + static_cast<int>(rng.below(7));
    const Matrix u = random_orthogonal(n, rng, t % 2 ? 1 : -1);
    const GivensNetwork net = givens_decompose(u);
    EXPECT_EQ(static_cast<int>(net.gates.size()), n * (n - 1) / 2);
    EXPECT_EQ(net.flip_last, u.determinant() < 0);
    worst = std::max(worst, (givens_reconstruct(net) - u).cwiseAbs().maxCoeff());
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(Givens, PermutationsGiveSwapOnlyNetworks) {
  Matrix p = Matrix::Zero(4, 4);
  const int perm[] = {2, 0, 3, 1};
  for (int i = 0; i < 4; ++i) p(perm[i], i) = 1.0;
  const GivensNetwork net = givens_decompose(p);
  EXPECT_LT((givens_reconstruct(net) - p).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_TRUE(net.swaps_only() || p.determinant() < 0);
  EXPECT_TRUE(givens_decompose(Matrix::Identity(5, 5)).swaps_only());
}

TEST(Givens, RejectsNonOrthogonal) {
  Matrix m = Matrix::Identity(3, 3);
  m(0, 1) = 0.1;
  EXPECT_THROW(givens_decompose(m), PreconditionError);
}

// One electron created in rotated orbital q lands on column q of u.
TEST(Givens, NetworkActsAsOrbitalRotationOnOneElectron) {
  CounterRng rng(2);
  const int n = 4, nq = 8;
  const Matrix u = random_orthogonal(n, rng, 1);
  const GivensNetwork net = givens_decompose(u);
  for (int q = 0; q < n; ++q) {
    Vector psi = Vector::Zero(std::size_t{1} << nq);
    psi(std::size_t{1} << (nq - 1 - 2 * q)) = 1.0;  // spin up in orbital q
    apply_rotation_network(psi, net);
    for (int p = 0; p < n; ++p) EXPECT_NEAR(psi(std::size_t{1} << (nq - 1 - 2 * p)), u(p, q), 1e-12);
  }
}

TEST(Givens, FciInvariantUnderNetworkRotation) {
  CounterRng rng(3);
  const auto ints = random_integrals(4, 4, 4);
  const auto h = build_sparse_hamiltonian(ints, 4);
  const double e0 = fci_ground_state(build_sparse_hamiltonian(ints, 4, ints.sector())).energy;
  for (int det : {1, -1}) {
    const Matrix u = random_orthogonal(4, rng, det);
    const auto rot = rotate_integrals(ints, u);
    const auto gs = fci_ground_state(build_sparse_hamiltonian(rot, 4, rot.sector()));
    EXPECT_NEAR(gs.energy, e0, 1e-9);
    Vector psi = gs.vec;
    apply_rotation_network(psi, givens_decompose(u));
    EXPECT_NEAR(expectation(h, psi), e0, 1e-9);
    apply_rotation_network_inverse(psi, givens_decompose(u));
    EXPECT_LT((psi - gs.vec).norm(), 1e-10);
  }
}

TEST(Givens, ColumnAndVectorApplicationAgree) {
  CounterRng rng(5);
  const Matrix u = random_orthogonal(3, rng);
  const GivensNetwork net = givens_decompose(u);
  Matrix cols = random_matrix(64, 3, rng);
  Matrix expect = cols;
  for (int c = 0; c < 3; ++c) {
    Vector v = expect.col(c);
    apply_rotation_network(v, net);
    expect.col(c) = v;
  }
  apply_rotation_network(cols, net);
  EXPECT_LT((cols - expect).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Givens, GateMatrixConventions) {
  const double th = 0.37;
  const Matrix g2 = gate_matrix(GateKind::givens, th, 2);
  EXPECT_NEAR(g2(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(g2(3, 3), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(g2(1, 2)), std::sin(th), 1e-15);
  const Matrix f2 = gate_matrix(GateKind::fswap, 0.0, 2);
  EXPECT_NEAR(f2(3, 3), -1.0, 1e-15);
  EXPECT_NEAR(f2(1, 2), 1.0, 1e-15);
  for (int d : {2, 4}) {
    const Matrix g = gate_matrix(GateKind::givens, th, d);
    EXPECT_LT((g * g.transpose() - Matrix::Identity(d * d, d * d)).cwiseAbs().maxCoeff(), 1e-14);
    const Matrix f = gate_matrix(GateKind::fswap, 0.0, d);
    EXPECT_LT((f * f - Matrix::Identity(d * d, d * d)).cwiseAbs().maxCoeff(), 1e-14);
  }
  // g(pi/2) equals the phased fswap (1 x Z) f
  Matrix z = Matrix::Identity(4, 4);
  z(1, 1) = z(3, 3) = -1.0;
  EXPECT_LT((gate_matrix(GateKind::givens, M_PI / 2, 2) - z * f2).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Givens, MergeLocalComposes) {
  CounterRng rng(6);
  const Matrix u = random_orthogonal(5, rng);
  const Matrix m = merge_local(u, 2, GateKind::givens, 0.4);
  check_orthogonal(m);
  EXPECT_LT((merge_local(m, 2, GateKind::givens, -0.4) - u).cwiseAbs().maxCoeff(), 1e-12);
  const Matrix s = merge_local(u, 1, GateKind::fswap);
  EXPECT_LT((merge_local(s, 1, GateKind::fswap) - u).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Registry, PairNetworkMatchesRelativeRotation) {
  CounterRng rng(7);
  RotationRegistry reg;
  const Matrix a = random_orthogonal(4, rng), b = random_orthogonal(4, rng);
  reg.add(a);
  reg.add(b);
  EXPECT_LT((givens_reconstruct(reg.pair_network(0, 1)) - a.transpose() * b).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((givens_reconstruct(reg.network(1)) - b).cwiseAbs().maxCoeff(), 1e-10);
  reg.merge(1, 0, GateKind::givens, 0.2);
  EXPECT_LT((reg.u(1) - merge_local(b, 0, GateKind::givens, 0.2)).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((givens_reconstruct(reg.network(1)) - reg.u(1)).cwiseAbs().maxCoeff(), 1e-10);
}

class MaxEntanglement : public ::testing::TestWithParam<int> {};

TEST_P(MaxEntanglement, CentralSchmidtRankAndEntropy) {
  const int n = GetParam();
  const GivensNetwork net = max_entanglement_network(n);
  const int half = n / 2;
  Vector psi = Vector::Zero(std::size_t{1} << n);
  psi(((std::size_t{1} << half) - 1) << half) = 1.0;
  apply_rotation_network(psi, net);
  const Mps m = mps_from_statevector(psi, n, 2, 1 << n);
  const Vector s = schmidt_values(m, half);
  int rank = 0;
  for (int i = 0; i < s.size(); ++i) rank += s(i) > 1e-10;
  EXPECT_EQ(rank, 1 << half);
  EXPECT_NEAR(schmidt_entropy(m, half), half * std::log(2.0), 1e-10);
}

INSTANTIATE_TEST_SUITE_P(Sizes, MaxEntanglement, ::testing::Values(4, 6, 8));
