#include "tnqe/subspace.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <fstream>
#include <limits>
#include <thread>

#include <json.hpp>

namespace tnqe {

OneHotBasis one_hot_decompose(const Mps& mps, int p, int ref) {
  const TwoSiteTensor t = two_site_tensor(mps, p);
  OneHotBasis b;
  b.ref = ref;
  b.p = p;
  b.kind = BasisKind::two_site;
  b.d = t.d;
  b.dl = t.dl;
  b.dr = t.dr;
  b.symmetric = t.symmetric;
  b.left = t.left;
  b.right = t.right;
  for (int l = 0; l < t.dl; ++l)
    for (int k1 = 0; k1 < t.d; ++k1)
      for (int k2 = 0; k2 < t.d; ++k2)
        for (int r = 0; r < t.dr; ++r)
          if (t.admissible(l, k1, k2, r)) b.tuples.push_back({l, k1, k2, r});
  b.t = coefficients_of(b, t);
  return b;
}

OneHotBasis whole_basis(int ref) {
  OneHotBasis b;
  b.ref = ref;
  b.kind = BasisKind::whole;
  b.t = Vector::Ones(1);
  return b;
}

Vector coefficients_of(const OneHotBasis& basis, const TwoSiteTensor& t) {
  Vector c(basis.size());
  for (int m = 0; m < basis.size(); ++m) {
    const auto& q = basis.tuples[m];
    c[m] = t.at(q[0], q[1], q[2], q[3]);
  }
  return c;
}

TwoSiteTensor tensor_from_coefficients(const OneHotBasis& basis, const Vector& c) {
  if (basis.kind != BasisKind::two_site) throw PreconditionError("not a two-site basis");
  TwoSiteTensor t;
  t.p = basis.p;
  t.d = basis.d;
  t.dl = basis.dl;
  t.dr = basis.dr;
  t.symmetric = basis.symmetric;
  t.left = basis.left;
  t.right = basis.right;
  t.data.assign(std::size_t(t.dl) * t.d * t.d * t.dr, 0.0);
  for (int m = 0; m < basis.size(); ++m) {
    const auto& q = basis.tuples[m];
    t.at(q[0], q[1], q[2], q[3]) = c[m];
  }
  return t;
}

Matrix one_hot_statevectors(const Mps& mps, const OneHotBasis& basis) {
  if (basis.kind == BasisKind::whole) {
    Matrix m(to_statevector(mps).size(), 1);
    m.col(0) = to_statevector(mps);
    return m;
  }
  const int n = mps.n_sites();
  const int p = basis.p;
  const int d = mps.d;
  if (mps.center != p && mps.center != p + 1)
    throw StateError("one-hot vectors need the canonical center at p or p+1");
  // Left environment: (d^p) x dl
  RowMatrix L = RowMatrix::Ones(1, 1);
  for (int i = 0; i < p; ++i) {
    const auto& s = mps.sites[i];
    RowMatrix next = L * s.as_right();
    L = Eigen::Map<RowMatrix>(next.data(), next.rows() * s.d, s.dr);
  }
  // Right environment: dr x d^(n-p-2)
  RowMatrix R = RowMatrix::Ones(1, 1);
  for (int i = n - 1; i > p + 1; --i) {
    const auto& s = mps.sites[i];
    RowMatrix next = s.as_left() * R;  // (dl*d) x rest
    R = Eigen::Map<RowMatrix>(next.data(), s.dl, s.d * next.cols());
  }
  if (L.cols() != basis.dl || R.rows() != basis.dr)
    throw StateError("basis does not match the MPS bond dimensions");
  const Eigen::Index nl = L.rows(), nr = R.cols();
  Matrix out = Matrix::Zero(nl * d * d * nr, basis.size());
  for (int m = 0; m < basis.size(); ++m) {
    const auto& q = basis.tuples[m];
    for (Eigen::Index xl = 0; xl < nl; ++xl) {
      const double lv = L(xl, q[0]);
      if (lv == 0.0) continue;
      const Eigen::Index base = ((xl * d + q[1]) * d + q[2]) * nr;
      for (Eigen::Index xr = 0; xr < nr; ++xr) out(base + xr, m) = lv * R(q[3], xr);
    }
  }
  return out;
}

int SubspacePencil::retained_count() const {
  return static_cast<int>(std::count(retained.begin(), retained.end(), 1));
}

std::uint64_t qpu_call_count(const std::vector<int>& sizes) {
  std::uint64_t n = 0;
  for (std::size_t a = 0; a < sizes.size(); ++a)
    for (std::size_t b = a + 1; b < sizes.size(); ++b) n += std::uint64_t(sizes[a]) * sizes[b];
  return 2 * n;
}

namespace {

template <class F>
void parallel_for(int n, int jobs, F&& f) {
  if (jobs <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  const int nt = std::min(jobs, n);
  std::vector<std::thread> pool;
  for (int t = 0; t < nt; ++t)
    pool.emplace_back([&, t] {
      for (int i = t; i < n; i += nt) f(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace

SubspacePencil assemble_pencil(const std::vector<PencilBlock>& blocks, const SparseHamiltonian& h,
                               const NoiseModel& noise, std::uint64_t stream, int jobs) {
  const int nb = static_cast<int>(blocks.size());
  if (nb == 0) throw PreconditionError("pencil needs at least one block");
  SubspacePencil out;
  out.noise = noise;
  out.stream = stream;
  int dim = 0;
  for (const auto& b : blocks) {
    if (!b.mps || !b.basis) throw PreconditionError("incomplete pencil block");
    if (b.mps->sector != blocks[0].mps->sector || b.mps->n_sites() != blocks[0].mps->n_sites())
      throw PreconditionError("references disagree on sector or length");
    out.block_ref.push_back(b.basis->ref);
    out.block_offset.push_back(dim);
    out.block_size.push_back(b.basis->size());
    dim += b.basis->size();
  }
  if (static_cast<std::size_t>(to_statevector(*blocks[0].mps).size()) != h.full_dim())
    throw PreconditionError("reference dimension does not match the Hamiltonian");

  std::vector<Matrix> v(nb), hv(nb);
  parallel_for(nb, jobs, [&](int b) {
    Matrix full = one_hot_statevectors(*blocks[b].mps, *blocks[b].basis);
    if (blocks[b].network) apply_rotation_network(full, *blocks[b].network);
    Matrix r(h.dim(), full.cols());
    for (std::size_t i = 0; i < h.dim(); ++i) r.row(i) = full.row(h.basis.states[i]);
    v[b] = std::move(r);
  });
  for (int b = 0; b < nb; ++b) hv[b] = h.apply(v[b]);

  out.h = Matrix::Zero(dim, dim);
  out.s = Matrix::Zero(dim, dim);
  for (int a = 0; a < nb; ++a)
    for (int b = a; b < nb; ++b) {
      const int oa = out.block_offset[a], ob = out.block_offset[b];
      const int ka = out.block_size[a], kb = out.block_size[b];
      Matrix hab = v[a].transpose() * hv[b];
      if (a == b) {
        out.h.block(oa, oa, ka, ka) = 0.5 * (hab + hab.transpose());
        out.s.block(oa, oa, ka, ka) = Matrix::Identity(ka, ka);
      } else {
        Matrix sab = v[a].transpose() * v[b];
        Matrix hba = v[b].transpose() * hv[a];
        hab = 0.5 * (hab + hba.transpose());
        out.h.block(oa, ob, ka, kb) = hab;
        out.h.block(ob, oa, kb, ka) = hab.transpose();
        out.s.block(oa, ob, ka, kb) = sab;
        out.s.block(ob, oa, kb, ka) = sab.transpose();
      }
    }
  out.qpu_calls = qpu_call_count(out.block_size);

  if (noise.enabled()) {
    std::vector<int> block_of(dim);
    for (int b = 0; b < nb; ++b)
      for (int m = 0; m < out.block_size[b]; ++m) block_of[out.block_offset[b] + m] = b;
    // S within a block is known exactly; every H element carries shot noise.
    for (int m = 0; m < dim; ++m)
      for (int n = m; n < dim; ++n) {
        const std::uint64_t key = (std::uint64_t(m) << 32) | std::uint64_t(n);
        const double dh = noise.delta_h * keyed_normal(noise.seed, stream, key, 0);
        out.h(m, n) += dh;
        if (n != m) out.h(n, m) += dh;
        if (block_of[m] == block_of[n]) continue;
        const double ds = noise.delta_s * keyed_normal(noise.seed, stream, key, 1);
        out.s(m, n) += ds;
        out.s(n, m) += ds;
      }
  }
  out.retained.assign(dim, 1);
  return out;
}

SubspacePencil assemble_pencil(const std::vector<Mps>& refs, const std::vector<OneHotBasis>& bases,
                               RotationRegistry& registry, const SparseHamiltonian& h,
                               const NoiseModel& noise, std::uint64_t stream, int jobs) {
  if (refs.size() != bases.size()) throw PreconditionError("one basis per reference expected");
  std::vector<PencilBlock> blocks;
  for (std::size_t j = 0; j < refs.size(); ++j) {
    const int ref = bases[j].ref;
    blocks.push_back({&refs[j], &bases[j], &registry.network(ref)});
  }
  return assemble_pencil(blocks, h, noise, stream, jobs);
}

SubspacePencil transform_pencil(const SubspacePencil& p, const std::vector<Matrix>& maps) {
  if (static_cast<int>(maps.size()) != p.n_blocks()) throw PreconditionError("one map per block expected");
  SubspacePencil out;
  out.noise = p.noise;
  out.stream = p.stream;
  out.block_ref = p.block_ref;
  int dim = 0;
  for (int b = 0; b < p.n_blocks(); ++b) {
    if (maps[b].cols() != p.block_size[b]) throw PreconditionError("block map has the wrong width");
    out.block_offset.push_back(dim);
    out.block_size.push_back(static_cast<int>(maps[b].rows()));
    dim += static_cast<int>(maps[b].rows());
  }
  out.h = Matrix::Zero(dim, dim);
  out.s = Matrix::Zero(dim, dim);
  for (int a = 0; a < p.n_blocks(); ++a)
    for (int b = 0; b < p.n_blocks(); ++b) {
      const auto hab = p.h.block(p.block_offset[a], p.block_offset[b], p.block_size[a], p.block_size[b]);
      const auto sab = p.s.block(p.block_offset[a], p.block_offset[b], p.block_size[a], p.block_size[b]);
      out.h.block(out.block_offset[a], out.block_offset[b], out.block_size[a], out.block_size[b]) =
          maps[a] * hab * maps[b].transpose();
      out.s.block(out.block_offset[a], out.block_offset[b], out.block_size[a], out.block_size[b]) =
          maps[a] * sab * maps[b].transpose();
    }
  out.h = 0.5 * (out.h + out.h.transpose()).eval();
  out.s = 0.5 * (out.s + out.s.transpose()).eval();
  out.retained.assign(dim, 1);
  return out;
}

double projection_norm(const Matrix& s_block, const Vector& s_col) {
  if (s_block.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (s_block + s_block.transpose()));
  const Vector& lam = es.eigenvalues();
  const double tol = std::sqrt(std::numeric_limits<double>::epsilon()) * lam.cwiseAbs().maxCoeff();
  const Vector y = es.eigenvectors().transpose() * s_col;
  double v = 0.0;
  for (int i = 0; i < lam.size(); ++i)
    if (lam[i] > tol) v += y[i] * y[i] / lam[i];
  return v;
}

namespace {

double condition_of(const Matrix& s) {
  if (s.rows() == 0) return 1.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues()[0], hi = es.eigenvalues()[s.rows() - 1];
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

Matrix sub(const Matrix& m, const std::vector<int>& idx) {
  Matrix out(idx.size(), idx.size());
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = 0; b < idx.size(); ++b) out(a, b) = m(idx[a], idx[b]);
  return out;
}

// Greedy scan with an incrementally grown Cholesky factor of the kept block.
std::vector<int> greedy_scan(const Matrix& s, double tol, double cond_max, bool check_cond) {
  const int n = static_cast<int>(s.rows());
  std::vector<int> kept;
  Matrix L = Matrix::Zero(n, n);
  for (int c = 0; c < n; ++c) {
    const double scc = s(c, c);
    if (!(scc > 0.0)) continue;
    const int k = static_cast<int>(kept.size());
    Vector col(k);
    for (int i = 0; i < k; ++i) col[i] = s(kept[i], c);
    Vector w = k ? Vector(L.topLeftCorner(k, k).triangularView<Eigen::Lower>().solve(col)) : Vector();
    const double proj = k ? w.squaredNorm() / scc : 0.0;
    if (1.0 - proj <= tol) continue;
    if (check_cond) {
      std::vector<int> trial = kept;
      trial.push_back(c);
      if (condition_of(sub(s, trial)) > cond_max) continue;
    }
    const double piv = scc - (k ? w.squaredNorm() : 0.0);
    if (!(piv > 0.0)) continue;
    if (k) L.block(k, 0, 1, k) = w.transpose();
    L(k, k) = std::sqrt(piv);
    kept.push_back(c);
  }
  return kept;
}

}  // namespace

void discard_columns(SubspacePencil& pencil, double tol, double cond_max) {
  const int n = pencil.dim();
  // Adding a column can only widen the spectrum of the kept block, so when the
  // final block passes the condition test every intermediate one did too and
  // the scan without per-step checks makes the same decisions.
  std::vector<int> kept = greedy_scan(pencil.s, tol, cond_max, false);
  if (condition_of(sub(pencil.s, kept)) > cond_max) kept = greedy_scan(pencil.s, tol, cond_max, true);
  pencil.retained.assign(n, 0);
  for (int c : kept) pencil.retained[c] = 1;
}

double retained_condition_number(const SubspacePencil& pencil) {
  std::vector<int> idx;
  for (int i = 0; i < pencil.dim(); ++i)
    if (pencil.retained[i]) idx.push_back(i);
  return condition_of(sub(pencil.s, idx));
}

namespace {

void fix_sign(Eigen::Ref<Vector> v) {
  Eigen::Index i;
  v.cwiseAbs().maxCoeff(&i);
  if (v[i] < 0) v = -v;
}

}  // namespace

GeeSolution solve_gee(const Matrix& h, const Matrix& s, double eps_sv, GeeMode mode) {
  const int n = static_cast<int>(h.rows());
  if (n == 0) throw DegeneratePencilError("empty pencil");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (s + s.transpose()));
  std::vector<int> keep;
  for (int i = 0; i < n; ++i)
    if (es.eigenvalues()[i] > eps_sv) keep.push_back(i);
  if (keep.empty()) throw DegeneratePencilError("all overlap eigenvalues below threshold");
  const int r = static_cast<int>(keep.size());
  Matrix U(n, r);
  Vector lam(r);
  for (int i = 0; i < r; ++i) {
    U.col(i) = es.eigenvectors().col(keep[i]);
    lam[i] = es.eigenvalues()[keep[i]];
  }
  const Matrix hs = 0.5 * (h + h.transpose());
  GeeSolution sol;
  sol.mode = mode;
  sol.rank = r;
  if (mode == GeeMode::projection) {
    const Matrix X = U * lam.cwiseInverse().cwiseSqrt().asDiagonal();
    Matrix hp = X.transpose() * hs * X;
    hp = 0.5 * (hp + hp.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> ep(hp);
    sol.energies = ep.eigenvalues();
    sol.c = X * ep.eigenvectors();
  } else {
    const Matrix A = U * lam.cwiseInverse().asDiagonal() * U.transpose() * hs;
    Eigen::EigenSolver<Matrix> eg(A);
    std::vector<std::pair<double, Vector>> pairs;
    for (int i = 0; i < n; ++i) {
      const auto ev = eg.eigenvalues()[i];
      if (std::abs(ev.imag()) > 1e-8 * (1.0 + std::abs(ev.real()))) continue;
      Vector c = eg.eigenvectors().col(i).real();
      if ((U.transpose() * c).norm() < 1e-8 * c.norm()) continue;
      const double nn = c.dot(s * c);
      if (!(nn > 0.0)) continue;
      pairs.push_back({ev.real(), c / std::sqrt(nn)});
    }
    if (pairs.empty()) throw DegeneratePencilError("no admissible eigenpairs in inversion mode");
    std::stable_sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    sol.energies.resize(pairs.size());
    sol.c.resize(n, pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      sol.energies[i] = pairs[i].first;
      sol.c.col(i) = pairs[i].second;
    }
  }
  for (int i = 0; i < sol.c.cols(); ++i) fix_sign(sol.c.col(i));
  const double e1 = sol.energies[0];
  sol.kappa1 = sol.c.col(0).squaredNorm() / std::sqrt(e1 * e1 + 1.0);
  return sol;
}

GeeSolution solve_gee(const SubspacePencil& pencil, double eps_sv, GeeMode mode) {
  std::vector<int> idx;
  for (int i = 0; i < pencil.dim(); ++i)
    if (pencil.retained[i]) idx.push_back(i);
  if (idx.empty()) throw DegeneratePencilError("no retained columns");
  GeeSolution r = solve_gee(sub(pencil.h, idx), sub(pencil.s, idx), eps_sv, mode);
  Matrix full = Matrix::Zero(pencil.dim(), r.c.cols());
  for (std::size_t a = 0; a < idx.size(); ++a) full.row(idx[a]) = r.c.row(a);
  r.c = std::move(full);
  return r;
}

std::optional<Vector> update_two_site(const SubspacePencil& pencil, int block, const GeeSolution& sol) {
  Vector slice = sol.c.col(0).segment(pencil.block_offset[block], pencil.block_size[block]);
  const double nrm = slice.norm();
  if (!(nrm > 1e-12)) return std::nullopt;
  return Vector(slice / nrm);
}

void write_pencil(const SubspacePencil& p, const std::string& path) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["dim"] = p.dim();
  j["blocks"] = nlohmann::json::array();
  for (int b = 0; b < p.n_blocks(); ++b)
    j["blocks"].push_back({{"ref", p.block_ref[b]}, {"offset", p.block_offset[b]}, {"size", p.block_size[b]}});
  auto rows = [](const Matrix& m) {
    nlohmann::json a = nlohmann::json::array();
    for (int i = 0; i < m.rows(); ++i) {
      std::vector<double> r(m.cols());
      for (int k = 0; k < m.cols(); ++k) r[k] = m(i, k);
      a.push_back(r);
    }
    return a;
  };
  j["h"] = rows(p.h);
  j["s"] = rows(p.s);
  j["retained"] = std::vector<int>(p.retained.begin(), p.retained.end());
  j["noise"] = {{"delta_h", p.noise.delta_h}, {"delta_s", p.noise.delta_s}, {"seed", p.noise.seed}, {"stream", p.stream}};
  j["qpu_calls"] = p.qpu_calls;
  std::ofstream os(path);
  if (!os) throw FormatError("cannot write " + path);
  os << j.dump(1) << "\n";
}

}  // namespace tnqe
