#include <gtest/gtest.h>

#include <filesystem>

#include "helpers.hpp"
#include "tnqe/hamiltonian.hpp"
#include "tnqe/mps.hpp"

using namespace tnqe;
using namespace tnqe::test;

namespace {

Mps h6_like(int chi, std::uint64_t seed) { return random_mps(6, 4, sector_from(6, 0), chi, seed); }

}  // namespace

TEST(Mps, RandomStateRespectsSectorAndBond) {
  const Mps m = h6_like(4, 1);
  EXPECT_LE(m.max_bond_dim(), 4);
  const Vector v = to_statevector(m);
  const Charge q = sector_from(6, 0);
  for (Eigen::Index x = 0; x < v.size(); ++x)
    if (std::abs(v(x)) > 1e-14) ASSERT_EQ(fock::charge_of(static_cast<std::uint64_t>(x), 12), q);
  EXPECT_LE(m.sector_parameter_count(), m.dense_parameter_count());
}

TEST(Mps, CanonicalFormOrthogonality) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Mps m = h6_like(4, seed);
    for (int c = 0; c < m.n_sites(); ++c) {
      canonicalize(m, c);
      EXPECT_EQ(m.center, c);
      for (int i = 0; i < c; ++i) EXPECT_LT(left_orth_error(m.sites[i]), 1e-10);
      for (int i = c + 1; i < m.n_sites(); ++i) EXPECT_LT(right_orth_error(m.sites[i]), 1e-10);
    }
  }
}

TEST(Mps, GaugeInvariantStatevector) {
  Mps m = h6_like(4, 7);
  normalize(m);
  const Vector ref = to_statevector(m);
  for (int c : {5, 0, 3}) {
    canonicalize(m, c);
    EXPECT_LT((to_statevector(m) - ref).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Mps, TruncationIdentity) {
  CounterRng rng(8);
  for (int t = 0; t < 20; ++t) {
    Mps m = h6_like(4, 100 + t);
    const int p = static_cast<int>(rng.below(5));
    canonicalize(m, p);
    TwoSiteTensor two = two_site_tensor(m, p);
    // perturb so truncation is not trivial
    for (auto& x : two.data)
      if (x != 0.0) x += 0.3 * rng.normal();
    const double nrm = two.norm();
    for (auto& x : two.data) x /= nrm;
    const SplitResult s = svd_split(two, 2);
    double kept = 0.0;
    for (int i = 0; i < s.all_sigma.size() && i < s.sigma.size(); ++i) kept += s.all_sigma(i) * s.all_sigma(i);
    EXPECT_NEAR(s.xi + kept, 1.0, 1e-12);
    EXPECT_NEAR(s.all_sigma.squaredNorm(), 1.0, 1e-12);
    EXPECT_NEAR(s.sigma.norm(), 1.0, 1e-12);
  }
}

TEST(Mps, SplitRoundTripWithoutTruncation) {
  Mps m = h6_like(3, 9);
  normalize(m);
  canonicalize(m, 2);
  const Vector ref = to_statevector(m);
  const TwoSiteTensor two = two_site_tensor(m, 2);
  const SplitResult s = svd_split(two, 64);
  EXPECT_NEAR(s.xi, 0.0, 1e-14);
  put_two_site(m, 2, s, true);
  EXPECT_LT((to_statevector(m) - ref).norm(), 1e-12);
  EXPECT_LT(left_orth_error(m.sites[2]), 1e-12);
}

TEST(Mps, StatevectorRoundTrip) {
  CounterRng rng(10);
  const auto ints = random_integrals(4, 4, 11);
  const auto h = build_sparse_hamiltonian(ints, 4, ints.sector());
  const Vector gs = fci_ground_state(h).vec;
  const Mps m = mps_from_statevector(gs, 4, 4, 64);
  EXPECT_LT((to_statevector(m) - gs).norm(), 1e-12);
  EXPECT_NEAR(expectation(m, h), fci_ground_state(h).energy, 1e-10);
}

TEST(Mps, InnerAndAmplitudeMatchStatevectors) {
  Mps a = h6_like(4, 12), b = h6_like(3, 13);
  const Vector va = to_statevector(a), vb = to_statevector(b);
  EXPECT_NEAR(inner(a, b), va.dot(vb), 1e-12);
  const std::vector<int> k = {3, 3, 3, 0, 0, 0};
  std::uint64_t idx = 0;
  for (int x : k) idx = idx * 4 + x;
  EXPECT_NEAR(amplitude(a, k), va(idx), 1e-12);
}

TEST(Mps, SplitToQubitsPreservesState) {
  Mps m = h6_like(4, 14);
  const Mps q = split_d4_to_d2(m);
  EXPECT_EQ(q.n_sites(), 12);
  EXPECT_EQ(q.d, 2);
  EXPECT_LT((to_statevector(q) - to_statevector(m)).norm(), 1e-12);
}

TEST(Mps, BasisAndProductStates) {
  const Mps hf = basis_state_mps(4, {3, 3, 0, 0});
  const Vector v = to_statevector(hf);
  EXPECT_NEAR(v(hf_determinant(4, 4)), 1.0, 1e-15);
  EXPECT_NEAR(v.norm(), 1.0, 1e-15);
  const Vector plus = Vector::Constant(2, std::sqrt(0.5));
  const Mps prod = product_mps(2, {plus, plus, plus});
  EXPECT_NEAR(to_statevector(prod).sum(), std::sqrt(8.0), 1e-12);
}

TEST(Mps, EntropyOfProductStateIsZero) {
  const Mps hf = basis_state_mps(4, {3, 3, 0, 0});
  for (int b = 1; b < 4; ++b) EXPECT_NEAR(schmidt_entropy(hf, b), 0.0, 1e-12);
}

TEST(Mps, SaveLoadRoundTrip) {
  const Mps m = h6_like(4, 15);
  const auto path = std::filesystem::temp_directory_path() / "tnqe_test_state.mps";
  save_mps(m, path);
  const Mps back = load_mps(path);
  std::filesystem::remove(path);
  EXPECT_LT((to_statevector(back) - to_statevector(m)).norm(), 1e-15);
  EXPECT_EQ(back.bonds, m.bonds);
}

TEST(Mps, BlockedSvdKeepsChargeBlocks) {
  CounterRng rng(16);
  Matrix a = random_matrix(6, 5, rng);
  std::vector<Charge> rq = {{0, 0}, {0, 0}, {1, 0}, {1, 0}, {1, 1}, {2, 0}};
  std::vector<Charge> cq = {{0, 0}, {1, 0}, {1, 0}, {1, 1}, {0, 0}};
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 5; ++j)
      if (!(rq[i] == cq[j])) a(i, j) = 0.0;
  const BlockedSvd s = blocked_svd(a, rq, cq, 10, 0.0);
  const Matrix back = s.u * s.s.asDiagonal() * s.vt;
  EXPECT_LT((back - a).cwiseAbs().maxCoeff(), 1e-12);
  const Eigen::JacobiSVD<Matrix> dense(a);
  for (int i = 0; i < s.s.size(); ++i) EXPECT_NEAR(s.s(i), dense.singularValues()(i), 1e-12);
}
