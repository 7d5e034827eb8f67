#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "helpers.hpp"
#include "tnqe/hamiltonian.hpp"
#include "tnqe/sweep.hpp"

using namespace tnqe;
using namespace tnqe::test;

namespace {

struct Problem {
  FermionIntegrals ints;
  SparseHamiltonian h;
  explicit Problem(FermionIntegrals i) : ints(std::move(i)), h(build_sparse_hamiltonian(ints, 4, ints.sector())) {}
};

TnqeState make_state(const Problem& pr, int m, int chi, std::uint64_t seed, bool rotated = false) {
  TnqeState st;
  st.h = &pr.h;
  st.sector = pr.ints.sector();
  CounterRng rng(seed);
  const int n = pr.ints.n_spatial;
  for (int j = 0; j < m; ++j) {
    st.refs.push_back(random_mps(n, 4, st.sector, chi, seed * 10 + j));
    st.registry.add(rotated && j > 0 ? random_orthogonal(n, rng, 1) : Matrix(Matrix::Identity(n, n)));
  }
  return st;
}

}  // namespace

// Plain two-site DMRG built from dense local eigenproblems.
TEST(Sweep, SingleReferenceMatchesTwoSiteDmrg) {
  FermionIntegrals ints = random_integrals(5, 5, 61, 1);
  Problem pr(ints);
  ASSERT_EQ(pr.ints.sector(), (Charge{3, 2}));
  const int chi = 3;
  TnqeState st = make_state(pr, 1, chi, 62);
  Mps ref = st.refs[0];
  normalize(ref);

  SweepConfig cfg;
  cfg.jset = {0};
  cfg.chi_max = chi;
  cfg.nreps = 0;
  cfg.e_tol = 1e3;
  cfg.solver.lin_dep_tol = 1e-14;
  evaluate_state(st, cfg);
  const SweepReport rep = generalized_sweep(st, cfg);

  const auto full = build_sparse_hamiltonian(ints, 4);
  const Matrix dense = Matrix(full.matrix);
  for (int p = 0; p < 4; ++p) {
    canonicalize(ref, p);
    const OneHotBasis b = one_hot_decompose(ref, p);
    const Matrix v = one_hot_statevectors(ref, b);
    const Eigen::SelfAdjointEigenSolver<Matrix> es(v.transpose() * dense * v);
    const TwoSiteTensor t = tensor_from_coefficients(b, es.eigenvectors().col(0));
    put_two_site(ref, p, svd_split(t, chi), true);
    const double e_ref = expectation(ref, pr.h);
    EXPECT_NEAR(rep.bonds[p].e_pencil, es.eigenvalues()(0), 1e-8) << p;
    EXPECT_NEAR(rep.bonds[p].e_new, e_ref, 1e-8) << p;
    EXPECT_TRUE(rep.bonds[p].accepted);
  }
  EXPECT_NEAR(st.e1, expectation(st.refs[0], pr.h), 1e-8);
}

TEST(Sweep, SingleSiteIsometryRowsOrthonormal) {
  Problem pr(random_integrals(5, 4, 63));
  TnqeState st = make_state(pr, 1, 3, 64);
  for (int p = 0; p < 4; ++p) {
    canonicalize(st.refs[0], p);
    const OneHotBasis b = one_hot_decompose(st.refs[0], p);
    const SplitResult s = svd_split(two_site_tensor(st.refs[0], p), 3);
    for (bool left : {true, false}) {
      const SingleSiteMap m = single_site_isometry(b, left ? s.right : s.left, s.bond, left);
      const Matrix g = m.t * m.t.transpose();
      EXPECT_LT((g - Matrix::Identity(g.rows(), g.rows())).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(Sweep, SingleSitePassesIssueNoOracleCalls) {
  Problem pr(random_integrals(4, 4, 65));
  std::uint64_t calls[2], apps[2];
  for (int i = 0; i < 2; ++i) {
    TnqeState st = make_state(pr, 2, 3, 66, true);
    SweepConfig cfg;
    cfg.jset = {0, 1};
    cfg.chi_max = 3;
    cfg.nreps = i == 0 ? 0 : 3;
    evaluate_state(st, cfg);
    const std::uint64_t before = pr.h.applications();
    generalized_sweep(st, cfg);
    apps[i] = pr.h.applications() - before;
    calls[i] = st.qpu_calls;
  }
  EXPECT_EQ(calls[0], calls[1]);
  EXPECT_EQ(apps[0], apps[1]);
}

TEST(Sweep, NoiselessBondEnergiesMonotone) {
  Problem pr(random_integrals(5, 4, 67));
  for (RotationType rot : {RotationType::none, RotationType::fswap, RotationType::givens}) {
    TnqeState st = make_state(pr, 3, 2, 68, true);
    SweepConfig cfg;
    cfg.jset = {0, 1, 2};
    cfg.chi_max = 2;
    cfg.rotation = rot;
    cfg.e_tol = 0.0;
    evaluate_state(st, cfg);
    double prev = st.e1;
    for (int s = 0; s < 2; ++s) {
      const SweepReport rep = generalized_sweep(st, cfg);
      for (const auto& b : rep.bonds) {
        if (b.accepted) EXPECT_LE(b.e_new, b.e_old);
        EXPECT_GE(b.e_pencil, fci_ground_state(pr.h).energy - 1e-9);
      }
      EXPECT_LE(st.e1, prev + 1e-12);
      prev = st.e1;
    }
  }
}

TEST(Sweep, BookkeepingMatchesRepresentedState) {
  Problem pr(random_integrals(4, 4, 69));
  TnqeState st = make_state(pr, 3, 2, 70, true);
  SweepConfig cfg;
  cfg.jset = {0, 1, 2};
  cfg.chi_max = 2;
  evaluate_state(st, cfg);
  for (RotationType rot : {RotationType::fswap, RotationType::givens, RotationType::givens}) {
    cfg.rotation = rot;
    generalized_sweep(st, cfg);
    EXPECT_NEAR(represented_energy(st), st.e1, 1e-9);
  }
}

TEST(Sweep, NoRotationLeavesRegistryUntouched) {
  Problem pr(random_integrals(4, 4, 71));
  TnqeState st = make_state(pr, 2, 2, 72, true);
  const Matrix u1 = st.registry.u(1);
  SweepConfig cfg;
  cfg.jset = {0, 1};
  cfg.chi_max = 2;
  evaluate_state(st, cfg);
  const SweepReport rep = generalized_sweep(st, cfg);
  EXPECT_EQ((st.registry.u(1) - u1).cwiseAbs().maxCoeff(), 0.0);
  for (const auto& b : rep.bonds)
    for (double th : b.theta) EXPECT_EQ(th, 0.0);
}

TEST(Rotation, FswapTrialAcceptsOnlyStrictImprovement) {
  // |up on p> (x) |down on p+1> swapped is still a product: tie, reject.
  TwoSiteTensor t;
  t.d = 4;
  t.symmetric = false;
  t.left = {Charge{}};
  t.right = {Charge{}};
  t.data.assign(16, 0.0);
  t.at(0, 2, 1, 0) = 1.0;
  EXPECT_FALSE(fswap_trial(t, 1).accept);
  // (|3,0> + |0,3>)/sqrt2 rotated by pi/4 is entangled; the swap does not help either.
  t.data.assign(16, 0.0);
  t.at(0, 3, 0, 0) = std::sqrt(0.5);
  t.at(0, 0, 3, 0) = std::sqrt(0.5);
  const FswapTrial tr = fswap_trial(t, 1);
  EXPECT_NEAR(tr.xi, 0.5, 1e-12);
  EXPECT_FALSE(tr.accept);
}

TEST(Rotation, ThetaSearchUndoesAKnownRotation) {
  // A product state rotated by g(0.3) is disentangled again by g(-0.3).
  TwoSiteTensor t;
  t.d = 4;
  t.symmetric = false;
  t.left = {Charge{}};
  t.right = {Charge{}};
  t.data.assign(16, 0.0);
  t.at(0, 2, 0, 0) = 1.0;  // one up electron on p
  const TwoSiteTensor rotated = apply_gate(t, gate_matrix(GateKind::givens, 0.3, 4));
  EXPECT_GT(svd_split(rotated, 1).xi, 1e-3);
  const ThetaResult r = optimize_theta(rotated, 1);
  EXPECT_LT(r.xi, 1e-10);
  const TwoSiteTensor back = apply_gate(rotated, gate_matrix(GateKind::givens, r.theta, 4));
  EXPECT_LT(svd_split(back, 1).xi, 1e-10);
}

TEST(Rotation, BlockMatrixIsOrthogonalOnClosedBasis) {
  Problem pr(random_integrals(4, 4, 73));
  TnqeState st = make_state(pr, 1, 4, 74);
  canonicalize(st.refs[0], 1);
  const OneHotBasis b = one_hot_decompose(st.refs[0], 1);
  for (GateKind k : {GateKind::givens, GateKind::fswap}) {
    const Matrix g = rotation_block_matrix(gate_matrix(k, 0.7, 4), b);
    EXPECT_LT((g * g.transpose() - Matrix::Identity(g.rows(), g.rows())).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Sweep, ValidatesConfig) {
  SweepConfig cfg;
  cfg.e_tol = -1.0;
  EXPECT_THROW(cfg.validate(), PreconditionError);
  Problem pr(random_integrals(3, 2, 75));
  TnqeState st = make_state(pr, 1, 2, 76);
  SweepConfig bad;
  bad.jset = {3};
  EXPECT_THROW(generalized_sweep(st, bad), PreconditionError);
  TnqeState empty;
  EXPECT_THROW(generalized_sweep(empty, SweepConfig{}), StateError);
}
