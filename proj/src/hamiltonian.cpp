#include "tnqe/hamiltonian.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <string>

namespace tnqe {

SectorBasis make_sector_basis(int n_spatial, std::optional<Charge> sector) {
  const int nq = 2 * n_spatial;
  if (nq > 20) throw ResourceError("Fock space too large for dense indexing");
  SectorBasis b;
  b.n_qubits = nq;
  b.restricted = sector.has_value();
  if (sector) b.sector = *sector;
  const std::uint64_t full = std::uint64_t{1} << nq;
  b.position.assign(full, -1);
  for (std::uint64_t x = 0; x < full; ++x) {
    if (sector && fock::charge_of(x, nq) != *sector) continue;
    b.position[x] = static_cast<std::int32_t>(b.states.size());
    b.states.push_back(x);
  }
  if (b.states.empty()) throw PreconditionError("empty charge sector");
  return b;
}

SparseHamiltonian build_sparse_hamiltonian(const FermionIntegrals& ints, int d,
                                           std::optional<Charge> sector) {
  if (d != 2 && d != 4) throw PreconditionError("local dimension must be 2 or 4");
  const int n = ints.n_spatial;
  const int nq = 2 * n;
  if (nq > 16) throw ResourceError("more than 16 spin-orbitals exceeds the desk-scale cap");

  SparseHamiltonian h;
  h.n_spatial = n;
  h.d = d;
  h.e_core = ints.e_core;
  h.basis = make_sector_basis(n, sector);
  const auto& B = h.basis;

  std::vector<Eigen::Triplet<double>> trip;
  std::vector<int> occ, vir;
  for (std::size_t col = 0; col < B.size(); ++col) {
    const std::uint64_t x = B.states[col];
    auto emit = [&](std::uint64_t y, double v) {
      if (v == 0.0) return;
      const std::int32_t row = B.position[y];
      if (row < 0) throw NumericalError("Hamiltonian leaked out of its sector");
      trip.emplace_back(row, static_cast<int>(col), v);
    };
    if (ints.e_core != 0.0) emit(x, ints.e_core);

    // One-body: sum_{pq sigma} h_pq a+_{p sigma} a_{q sigma}
    for (int qs = 0; qs < nq; ++qs) {
      if (!fock::occupied(x, nq, qs)) continue;
      const int s1 = fock::parity_before(x, nq, qs);
      const std::uint64_t x1 = x ^ fock::qubit_mask(nq, qs);
      for (int ps = qs % 2; ps < nq; ps += 2) {
        if (fock::occupied(x1, nq, ps)) continue;
        const double v = ints.h1(ps / 2, qs / 2);
        if (v == 0.0) continue;
        const int s2 = fock::parity_before(x1, nq, ps);
        emit(x1 | fock::qubit_mask(nq, ps), ((s1 + s2) & 1) ? -v : v);
      }
    }

    // Two-body: sum h_PQRS a+_P a+_Q a_R a_S, h_PQRS = 1/2 (ps|qr), spin(P)=spin(S),
    // spin(Q)=spin(R). Operators act right to left: a_S first.
    for (int S = 0; S < nq; ++S) {
      if (!fock::occupied(x, nq, S)) continue;
      const int sgS = fock::parity_before(x, nq, S);
      const std::uint64_t xS = x ^ fock::qubit_mask(nq, S);
      for (int R = 0; R < nq; ++R) {
        if (!fock::occupied(xS, nq, R)) continue;
        const int sgR = fock::parity_before(xS, nq, R);
        const std::uint64_t xR = xS ^ fock::qubit_mask(nq, R);
        for (int Q = R % 2; Q < nq; Q += 2) {
          if (fock::occupied(xR, nq, Q)) continue;
          const int sgQ = fock::parity_before(xR, nq, Q);
          const std::uint64_t xQ = xR | fock::qubit_mask(nq, Q);
          for (int P = S % 2; P < nq; P += 2) {
            if (fock::occupied(xQ, nq, P)) continue;
            const double v = 0.5 * ints.eri(P / 2, S / 2, Q / 2, R / 2);
            if (v == 0.0) continue;
            const int sgP = fock::parity_before(xQ, nq, P);
            emit(xQ | fock::qubit_mask(nq, P), ((sgS + sgR + sgQ + sgP) & 1) ? -v : v);
          }
        }
      }
    }
  }
  h.matrix.resize(static_cast<int>(B.size()), static_cast<int>(B.size()));
  h.matrix.setFromTriplets(trip.begin(), trip.end());
  h.matrix.prune(0.0);
  h.matrix.makeCompressed();
  return h;
}

Vector SparseHamiltonian::gather(const Vector& full) const {
  if (static_cast<std::size_t>(full.size()) != full_dim())
    throw PreconditionError("statevector dimension mismatch");
  Vector r(dim());
  for (std::size_t i = 0; i < dim(); ++i) r[i] = full[basis.states[i]];
  return r;
}

Vector SparseHamiltonian::scatter(const Vector& restricted) const {
  Vector f = Vector::Zero(full_dim());
  for (std::size_t i = 0; i < dim(); ++i) f[basis.states[i]] = restricted[i];
  return f;
}

Matrix SparseHamiltonian::apply(const Matrix& restricted) const {
  calls_->fetch_add(1);
  return matrix * restricted;
}

double SparseHamiltonian::leakage(const Vector& full) const {
  if (static_cast<std::size_t>(full.size()) != full_dim())
    throw PreconditionError("statevector dimension mismatch");
  double out = 0.0;
  for (std::size_t x = 0; x < full_dim(); ++x)
    if (basis.position[x] < 0) out += full[x] * full[x];
  return out;
}

std::uint64_t hf_determinant(int n_spatial, int n_electrons, int ms2) {
  const Charge c = sector_from(n_electrons, ms2);
  const int nq = 2 * n_spatial;
  std::uint64_t x = 0;
  for (int p = 0; p < c.up; ++p) x |= fock::qubit_mask(nq, 2 * p);
  for (int p = 0; p < c.dn; ++p) x |= fock::qubit_mask(nq, 2 * p + 1);
  return x;
}

double hf_energy(const FermionIntegrals& ints) {
  if (ints.n_electrons % 2 != 0) throw UnsupportedError("closed-shell reference needs even electron count");
  const int nocc = ints.n_electrons / 2;
  double e = ints.e_core;
  for (int i = 0; i < nocc; ++i) e += 2.0 * ints.h1(i, i);
  for (int i = 0; i < nocc; ++i)
    for (int j = 0; j < nocc; ++j) e += 2.0 * ints.eri(i, i, j, j) - ints.eri(i, j, j, i);
  return e;
}

namespace {

GroundState lanczos(const SparseHamiltonian& h, std::uint64_t seed) {
  const int n = static_cast<int>(h.dim());
  CounterRng rng(seed);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.normal();
  v.normalize();
  const int kmax = std::min(n, 120);
  double best_res = 1e300;
  for (int restart = 0; restart < 60; ++restart) {
    Matrix Q(n, kmax);
    Vector alpha(kmax), beta(kmax);
    Q.col(0) = v;
    int k = 0;
    for (; k < kmax; ++k) {
      Vector w = h.matrix * Q.col(k);
      alpha[k] = Q.col(k).dot(w);
      // full reorthogonalization, twice for stability
      for (int pass = 0; pass < 2; ++pass) w -= Q.leftCols(k + 1) * (Q.leftCols(k + 1).transpose() * w);
      beta[k] = w.norm();
      if (k + 1 == kmax || beta[k] < 1e-12) {
        ++k;
        break;
      }
      Q.col(k + 1) = w / beta[k];
    }
    Matrix T = Matrix::Zero(k, k);
    for (int i = 0; i < k; ++i) {
      T(i, i) = alpha[i];
      if (i + 1 < k) T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(T);
    v = Q.leftCols(k) * es.eigenvectors().col(0);
    v.normalize();
    const double e = v.dot(h.matrix * v);
    const double res = (h.matrix * v - e * v).norm();
    best_res = res;
    if (res < 1e-9) {
      GroundState gs;
      gs.energy = e;
      gs.vec = h.scatter(v);
      gs.residual = res;
      return gs;
    }
  }
  throw NumericalError("Lanczos did not converge; residual " + std::to_string(best_res));
}

}  // namespace

GroundState fci_ground_state(const SparseHamiltonian& h, std::uint64_t seed) {
  if (h.dim() == 0) throw PreconditionError("empty sector");
  if (h.dim() > 4096) return lanczos(h, seed);
  Matrix dense = Matrix(h.matrix);
  Eigen::SelfAdjointEigenSolver<Matrix> es(dense);
  GroundState gs;
  gs.energy = es.eigenvalues()[0];
  Vector v = es.eigenvectors().col(0);
  // deterministic sign: largest-magnitude component positive
  Eigen::Index imax;
  v.cwiseAbs().maxCoeff(&imax);
  if (v[imax] < 0) v = -v;
  gs.residual = (dense * v - gs.energy * v).norm();
  gs.vec = h.scatter(v);
  return gs;
}

double oracle_matrix_element(const Vector& bra, const SparseHamiltonian* op, const Vector& ket) {
  if (bra.size() != ket.size()) throw PreconditionError("statevector dimension mismatch");
  if (!op) return bra.dot(ket);
  if (static_cast<std::size_t>(ket.size()) != op->full_dim())
    throw PreconditionError("statevector dimension does not match the operator");
  if (op->leakage(ket) > 1e-24 * std::max(1.0, ket.squaredNorm()) ||
      op->leakage(bra) > 1e-24 * std::max(1.0, bra.squaredNorm()))
    throw PreconditionError("statevector has weight outside the operator's sector");
  const Vector k = op->gather(ket);
  return op->gather(bra).dot(op->apply(k).col(0));
}

double expectation(const SparseHamiltonian& h, const Vector& full) {
  return oracle_matrix_element(full, &h, full) / full.squaredNorm();
}

}  // namespace tnqe
