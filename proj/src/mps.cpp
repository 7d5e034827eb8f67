#include "tnqe/mps.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <bit>
#include <climits>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>

namespace tnqe {

double left_orth_error(const SiteTensor& a) {
  const auto m = a.as_left();
  return (m.transpose() * m - Matrix::Identity(a.dr, a.dr)).cwiseAbs().maxCoeff();
}

double right_orth_error(const SiteTensor& a) {
  const auto m = a.as_right();
  return (m * m.transpose() - Matrix::Identity(a.dl, a.dl)).cwiseAbs().maxCoeff();
}

int Mps::max_bond_dim() const {
  int m = 1;
  for (const auto& b : bonds) m = std::max(m, static_cast<int>(b.size()));
  return m;
}

std::size_t Mps::dense_parameter_count() const {
  std::size_t n = 0;
  for (const auto& s : sites) n += s.data.size();
  return n;
}

std::size_t Mps::sector_parameter_count() const {
  std::size_t n = 0;
  for (int i = 0; i < n_sites(); ++i) {
    const auto& s = sites[i];
    for (int l = 0; l < s.dl; ++l)
      for (int k = 0; k < s.d; ++k)
        for (int r = 0; r < s.dr; ++r)
          if (bonds[i][l] + local(i, k) == bonds[i + 1][r]) ++n;
  }
  return n;
}

double TwoSiteTensor::norm() const {
  double s = 0.0;
  for (double v : data) s += v * v;
  return std::sqrt(s);
}

BlockedSvd blocked_svd(const Matrix& m, const std::vector<Charge>& row_q,
                       const std::vector<Charge>& col_q, int keep_max, double rel_cutoff) {
  std::map<Charge, std::pair<std::vector<int>, std::vector<int>>> blocks;
  for (int i = 0; i < static_cast<int>(row_q.size()); ++i) blocks[row_q[i]].first.push_back(i);
  for (int j = 0; j < static_cast<int>(col_q.size()); ++j) blocks[col_q[j]].second.push_back(j);

  struct Block {
    Charge q;
    const std::vector<int>* rows;
    const std::vector<int>* cols;
    Matrix u, v;
    Vector s;
  };
  std::vector<Block> done;
  struct Piece {
    double s;
    int block;
    int idx;
  };
  std::vector<Piece> pieces;
  for (auto& [q, rc] : blocks) {
    if (rc.first.empty() || rc.second.empty()) continue;
    Matrix sub(rc.first.size(), rc.second.size());
    for (std::size_t a = 0; a < rc.first.size(); ++a)
      for (std::size_t b = 0; b < rc.second.size(); ++b) sub(a, b) = m(rc.first[a], rc.second[b]);
    Eigen::BDCSVD<Matrix> svd(sub, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Block blk{q, &rc.first, &rc.second, svd.matrixU(), svd.matrixV(), svd.singularValues()};
    const int bi = static_cast<int>(done.size());
    for (int i = 0; i < blk.s.size(); ++i) pieces.push_back({blk.s[i], bi, i});
    done.push_back(std::move(blk));
  }
  std::stable_sort(pieces.begin(), pieces.end(),
                   [](const Piece& a, const Piece& b) { return a.s > b.s; });

  BlockedSvd out;
  out.all.resize(static_cast<int>(pieces.size()));
  for (std::size_t i = 0; i < pieces.size(); ++i) out.all[i] = pieces[i].s;
  const double smax = pieces.empty() ? 0.0 : pieces.front().s;
  int kept = 0;
  for (const auto& pc : pieces) {
    if (kept >= keep_max || pc.s <= rel_cutoff * smax || pc.s == 0.0) break;
    ++kept;
  }
  out.u = Matrix::Zero(m.rows(), kept);
  out.vt = Matrix::Zero(kept, m.cols());
  out.s.resize(kept);
  out.charges.resize(kept);
  for (int c = 0; c < kept; ++c) {
    const auto& pc = pieces[c];
    const auto& blk = done[pc.block];
    out.s[c] = pc.s;
    out.charges[c] = blk.q;
    for (std::size_t a = 0; a < blk.rows->size(); ++a) out.u((*blk.rows)[a], c) = blk.u(a, pc.idx);
    for (std::size_t b = 0; b < blk.cols->size(); ++b) out.vt(c, (*blk.cols)[b]) = blk.v(b, pc.idx);
  }
  return out;
}

namespace {

constexpr double kZeroDrop = 1e-14;

SiteTensor from_rows(const Matrix& m, int dl, int d, int dr) {
  SiteTensor t(dl, d, dr);
  t.as_left() = m;  // m is (dl*d) x dr; works for either view since storage is shared
  return t;
}

SiteTensor from_right_rows(const Matrix& m, int dl, int d, int dr) {
  SiteTensor t(dl, d, dr);
  t.as_right() = m;
  return t;
}

// Move the center from site i to i+1.
void shift_right(Mps& mps, int i) {
  SiteTensor& a = mps.sites[i];
  std::vector<Charge> rq(a.dl * a.d);
  for (int l = 0; l < a.dl; ++l)
    for (int k = 0; k < a.d; ++k) rq[l * a.d + k] = mps.bonds[i][l] + mps.local(i, k);
  BlockedSvd svd = blocked_svd(Matrix(a.as_left()), rq, mps.bonds[i + 1], INT_MAX, kZeroDrop);
  if (svd.s.size() == 0) throw NumericalError("MPS has zero norm");
  const int k = static_cast<int>(svd.s.size());
  Matrix carry = svd.s.asDiagonal() * svd.vt;
  SiteTensor& b = mps.sites[i + 1];
  Matrix nb = carry * Matrix(b.as_right());
  const int d = a.d, dl = a.dl, d2 = b.d, dr2 = b.dr;
  a = from_rows(svd.u, dl, d, k);
  b = from_right_rows(nb, k, d2, dr2);
  mps.bonds[i + 1] = svd.charges;
}

// Move the center from site i to i-1.
void shift_left(Mps& mps, int i) {
  SiteTensor& a = mps.sites[i];
  std::vector<Charge> cq(a.d * a.dr);
  for (int k = 0; k < a.d; ++k)
    for (int r = 0; r < a.dr; ++r) cq[k * a.dr + r] = mps.bonds[i + 1][r] - mps.local(i, k);
  BlockedSvd svd = blocked_svd(Matrix(a.as_right()), mps.bonds[i], cq, INT_MAX, kZeroDrop);
  if (svd.s.size() == 0) throw NumericalError("MPS has zero norm");
  const int k = static_cast<int>(svd.s.size());
  Matrix carry = svd.u * svd.s.asDiagonal();
  SiteTensor& b = mps.sites[i - 1];
  Matrix nb = Matrix(b.as_left()) * carry;
  const int d = a.d, dr = a.dr, dl0 = b.dl, d0 = b.d;
  a = from_right_rows(svd.vt, k, d, dr);
  b = from_rows(nb, dl0, d0, k);
  mps.bonds[i] = svd.charges;
}

}  // namespace

void canonicalize(Mps& mps, int p) {
  const int n = mps.n_sites();
  if (p < 0 || p >= n) throw PreconditionError("canonical center out of range");
  if (mps.center < 0) {
    for (int i = 0; i < p; ++i) shift_right(mps, i);
    for (int i = n - 1; i > p; --i) shift_left(mps, i);
  } else {
    for (int i = mps.center; i < p; ++i) shift_right(mps, i);
    for (int i = mps.center; i > p; --i) shift_left(mps, i);
  }
  mps.center = p;
}

double normalize(Mps& mps) {
  if (mps.center < 0) canonicalize(mps, 0);
  auto& c = mps.sites[mps.center];
  double nrm = 0.0;
  for (double v : c.data) nrm += v * v;
  nrm = std::sqrt(nrm);
  if (nrm == 0.0) throw NumericalError("cannot normalize a zero MPS");
  for (double& v : c.data) v /= nrm;
  return nrm;
}

namespace {

int up_sites_before(int d, int b) { return d == 4 ? b : (b + 1) / 2; }
int dn_sites_before(int d, int b) { return d == 4 ? b : b / 2; }

}  // namespace

Mps random_mps(int n_sites, int d, Charge sector, int chi, std::uint64_t seed) {
  if (d != 2 && d != 4) throw PreconditionError("local dimension must be 2 or 4");
  if (n_sites < 1 || chi < 1) throw PreconditionError("need at least one site and chi >= 1");
  const int ups = up_sites_before(d, n_sites), dns = dn_sites_before(d, n_sites);
  if (sector.up < 0 || sector.dn < 0 || sector.up > ups || sector.dn > dns)
    throw PreconditionError("sector unreachable with the given sites");

  // Admissible charges per bond, nearest to the uniform-filling path first.
  std::vector<std::vector<Charge>> labels(n_sites + 1);
  for (int b = 0; b <= n_sites; ++b) {
    const int ub = up_sites_before(d, b), db = dn_sites_before(d, b);
    const double tu = ups ? double(sector.up) * ub / ups : 0.0;
    const double td = dns ? double(sector.dn) * db / dns : 0.0;
    const Charge path{static_cast<int>(std::lround(tu)), static_cast<int>(std::lround(td))};
    std::vector<std::pair<double, Charge>> cand;
    for (int u = 0; u <= std::min(ub, sector.up); ++u)
      for (int w = 0; w <= std::min(db, sector.dn); ++w) {
        if (sector.up - u > ups - ub || sector.dn - w > dns - db) continue;
        const Charge c{u, w};
        if (c == path) continue;
        cand.push_back({std::abs(u - tu) + std::abs(w - td), c});
      }
    std::stable_sort(cand.begin(), cand.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    const int cap = (b == 0 || b == n_sites) ? 1 : chi;
    labels[b].push_back(path);
    for (std::size_t i = 0; i < cand.size() && static_cast<int>(labels[b].size()) < cap; ++i)
      labels[b].push_back(cand[i].second);
    // Extra copies of existing charges when chi exceeds the distinct count.
    for (std::size_t i = 0; static_cast<int>(labels[b].size()) < cap && i < 4 * std::size_t(cap); ++i)
      labels[b].push_back(labels[b][i % labels[b].size()]);
  }

  Mps m;
  m.d = d;
  m.sector = sector;
  m.symmetric = true;
  m.sites.resize(n_sites);

  // Drop labels with no connection to a neighbour; the uniform path always
  // survives because its increments are valid local charges.
  bool changed = true;
  while (changed) {
    changed = false;
    for (int b = 1; b < n_sites; ++b) {
      std::vector<Charge> keep;
      for (const Charge& c : labels[b]) {
        bool from_left = false, to_right = false;
        for (const Charge& l : labels[b - 1])
          for (int k = 0; k < d; ++k)
            if (l + fock::local_charge(d, b - 1, k) == c) from_left = true;
        for (const Charge& r : labels[b + 1])
          for (int k = 0; k < d; ++k)
            if (c + fock::local_charge(d, b, k) == r) to_right = true;
        if (from_left && to_right) keep.push_back(c);
      }
      if (keep.size() != labels[b].size()) {
        labels[b] = keep;
        changed = true;
      }
    }
  }
  m.bonds = labels;

  CounterRng rng(seed);
  for (int i = 0; i < n_sites; ++i) {
    SiteTensor t(m.bond_dim(i), d, m.bond_dim(i + 1));
    for (int l = 0; l < t.dl; ++l)
      for (int k = 0; k < d; ++k)
        for (int r = 0; r < t.dr; ++r)
          if (m.bonds[i][l] + m.local(i, k) == m.bonds[i + 1][r]) t.at(l, k, r) = rng.normal();
    m.sites[i] = std::move(t);
  }
  m.center = -1;
  canonicalize(m, 0);
  normalize(m);
  return m;
}

Mps product_mps(int d, const std::vector<Vector>& locals) {
  Mps m;
  m.d = d;
  m.symmetric = false;
  m.sites.resize(locals.size());
  m.bonds.assign(locals.size() + 1, std::vector<Charge>{Charge{}});
  for (std::size_t i = 0; i < locals.size(); ++i) {
    if (locals[i].size() != d) throw PreconditionError("local vector has wrong dimension");
    SiteTensor t(1, d, 1);
    for (int k = 0; k < d; ++k) t.at(0, k, 0) = locals[i][k];
    m.sites[i] = std::move(t);
  }
  m.center = -1;
  return m;
}

Mps basis_state_mps(int d, const std::vector<int>& k, int) {
  Mps m;
  m.d = d;
  m.symmetric = true;
  const int n = static_cast<int>(k.size());
  m.sites.resize(n);
  m.bonds.resize(n + 1);
  m.bonds[0] = {Charge{}};
  for (int i = 0; i < n; ++i) {
    if (k[i] < 0 || k[i] >= d) throw PreconditionError("local index out of range");
    m.bonds[i + 1] = {m.bonds[i][0] + fock::local_charge(d, i, k[i])};
    SiteTensor t(1, d, 1);
    t.at(0, k[i], 0) = 1.0;
    m.sites[i] = std::move(t);
  }
  m.sector = m.bonds[n][0];
  m.center = 0;
  return m;
}

Mps mps_from_statevector(const Vector& psi, int n_sites, int d, int chi_max) {
  std::size_t full = 1;
  for (int i = 0; i < n_sites; ++i) full *= d;
  if (static_cast<std::size_t>(psi.size()) != full) throw PreconditionError("statevector size mismatch");
  Mps m;
  m.d = d;
  m.symmetric = false;
  m.sites.resize(n_sites);
  m.bonds.assign(n_sites + 1, std::vector<Charge>{Charge{}});
  RowMatrix rem = Eigen::Map<const RowMatrix>(psi.data(), 1, psi.size());
  for (int i = 0; i < n_sites - 1; ++i) {
    const int dl = static_cast<int>(rem.rows());
    const Eigen::Index rest = rem.cols() / d;
    RowMatrix mat = Eigen::Map<RowMatrix>(rem.data(), dl * d, rest);
    Eigen::BDCSVD<Matrix> svd(Matrix(mat), Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector s = svd.singularValues();
    int k = 0;
    while (k < s.size() && k < chi_max && s[k] > kZeroDrop * s[0]) ++k;
    k = std::max(k, 1);
    m.sites[i] = from_rows(svd.matrixU().leftCols(k), dl, d, k);
    m.bonds[i + 1].assign(k, Charge{});
    rem = s.head(k).asDiagonal() * svd.matrixV().leftCols(k).transpose();
  }
  const int dl = static_cast<int>(rem.rows());
  SiteTensor last(dl, d, 1);
  for (int l = 0; l < dl; ++l)
    for (int k = 0; k < d; ++k) last.at(l, k, 0) = rem(l, k);
  m.sites[n_sites - 1] = std::move(last);
  m.center = n_sites - 1;
  return m;
}

TwoSiteTensor two_site_tensor(const Mps& mps, int p) {
  if (p < 0 || p + 1 >= mps.n_sites()) throw PreconditionError("bond out of range");
  if (mps.center != p && mps.center != p + 1)
    throw StateError("two-site tensor requires the canonical center at p or p+1");
  const auto& a = mps.sites[p];
  const auto& b = mps.sites[p + 1];
  TwoSiteTensor t;
  t.p = p;
  t.d = mps.d;
  t.dl = a.dl;
  t.dr = b.dr;
  t.symmetric = mps.symmetric;
  t.left = mps.bonds[p];
  t.right = mps.bonds[p + 2];
  t.data.resize(std::size_t(t.dl) * t.d * t.d * t.dr);
  Eigen::Map<RowMatrix>(t.data.data(), t.dl * t.d, t.d * t.dr) = a.as_left() * b.as_right();
  return t;
}

SplitResult svd_split(const TwoSiteTensor& t, int chi_max) {
  if (chi_max < 1) throw PreconditionError("chi_max must be positive");
  const int rows = t.dl * t.d, cols = t.d * t.dr;
  std::vector<Charge> rq(rows), cq(cols);
  for (int l = 0; l < t.dl; ++l)
    for (int k = 0; k < t.d; ++k) rq[l * t.d + k] = t.left[l] + t.local(t.p, k);
  for (int k = 0; k < t.d; ++k)
    for (int r = 0; r < t.dr; ++r) cq[k * t.dr + r] = t.right[r] - t.local(t.p + 1, k);
  Matrix m = Eigen::Map<const RowMatrix>(t.data.data(), rows, cols);
  BlockedSvd svd = blocked_svd(m, rq, cq, chi_max, kZeroDrop);
  if (svd.s.size() == 0) throw NumericalError("cannot split a zero two-site tensor");
  SplitResult out;
  const double total = svd.all.squaredNorm();
  out.all_sigma = svd.all / std::sqrt(total);
  out.xi = std::max(0.0, 1.0 - svd.s.squaredNorm() / total);
  out.sigma = svd.s / svd.s.norm();
  const int k = static_cast<int>(svd.s.size());
  out.left = from_rows(svd.u, t.dl, t.d, k);
  out.right = from_right_rows(svd.vt, k, t.d, t.dr);
  out.bond = svd.charges;
  return out;
}

void put_two_site(Mps& mps, int p, const SplitResult& s, bool center_right) {
  SiteTensor a = s.left, b = s.right;
  if (center_right) {
    b.as_right() = s.sigma.asDiagonal() * Matrix(b.as_right());
  } else {
    a.as_left() = Matrix(a.as_left()) * s.sigma.asDiagonal();
  }
  mps.sites[p] = std::move(a);
  mps.sites[p + 1] = std::move(b);
  mps.bonds[p + 1] = s.bond;
  mps.center = center_right ? p + 1 : p;
}

Vector schmidt_values(const Mps& mps, int bond) {
  if (bond < 1 || bond >= mps.n_sites()) throw PreconditionError("bond out of range");
  Mps c = mps;
  canonicalize(c, bond - 1);
  const auto& a = c.sites[bond - 1];
  std::vector<Charge> rq(a.dl * a.d);
  for (int l = 0; l < a.dl; ++l)
    for (int k = 0; k < a.d; ++k) rq[l * a.d + k] = c.bonds[bond - 1][l] + c.local(bond - 1, k);
  BlockedSvd svd = blocked_svd(Matrix(a.as_left()), rq, c.bonds[bond], INT_MAX, 0.0);
  return svd.all / svd.all.norm();
}

double schmidt_entropy(const Mps& mps, int bond) {
  const Vector s = schmidt_values(mps, bond);
  double e = 0.0;
  for (double v : s)
    if (v > 0.0) e -= v * v * std::log(v * v);
  return e;
}

Vector to_statevector(const Mps& mps) {
  std::size_t full = 1;
  for (int i = 0; i < mps.n_sites(); ++i) {
    full *= mps.d;
    if (full > 65536) throw ResourceError("statevector export capped at 65536 amplitudes");
  }
  RowMatrix acc = RowMatrix::Ones(1, 1);
  for (const auto& s : mps.sites) {
    RowMatrix next = acc * s.as_right();  // rows x (d*dr)
    acc = Eigen::Map<RowMatrix>(next.data(), next.rows() * s.d, s.dr);
  }
  return Eigen::Map<Vector>(acc.data(), acc.size());
}

double inner(const Mps& a, const Mps& b) {
  if (a.n_sites() != b.n_sites() || a.d != b.d) throw PreconditionError("MPS shapes differ");
  Matrix env = Matrix::Ones(1, 1);
  for (int i = 0; i < a.n_sites(); ++i) {
    const auto& A = a.sites[i];
    const auto& B = b.sites[i];
    Matrix next = Matrix::Zero(A.dr, B.dr);
    for (int k = 0; k < A.d; ++k) {
      Matrix ak(A.dl, A.dr), bk(B.dl, B.dr);
      for (int l = 0; l < A.dl; ++l)
        for (int r = 0; r < A.dr; ++r) ak(l, r) = A.at(l, k, r);
      for (int l = 0; l < B.dl; ++l)
        for (int r = 0; r < B.dr; ++r) bk(l, r) = B.at(l, k, r);
      next += ak.transpose() * env * bk;
    }
    env = std::move(next);
  }
  return env(0, 0);
}

double amplitude(const Mps& mps, const std::vector<int>& k) {
  if (static_cast<int>(k.size()) != mps.n_sites()) throw PreconditionError("bitstring length mismatch");
  RowMatrix v = RowMatrix::Ones(1, 1);
  for (int i = 0; i < mps.n_sites(); ++i) {
    const auto& s = mps.sites[i];
    RowMatrix m(s.dl, s.dr);
    for (int l = 0; l < s.dl; ++l)
      for (int r = 0; r < s.dr; ++r) m(l, r) = s.at(l, k[i], r);
    v = v * m;
  }
  return v(0, 0);
}

Mps split_d4_to_d2(const Mps& mps) {
  if (mps.d != 4) throw PreconditionError("split expects d=4 sites");
  const int n = mps.n_sites();
  Mps out;
  out.d = 2;
  out.sector = mps.sector;
  out.symmetric = mps.symmetric;
  out.sites.resize(2 * n);
  out.bonds.resize(2 * n + 1);
  for (int p = 0; p < n; ++p) {
    const auto& a = mps.sites[p];
    Matrix m(a.dl * 2, 2 * a.dr);
    std::vector<Charge> rq(a.dl * 2), cq(2 * a.dr);
    for (int l = 0; l < a.dl; ++l)
      for (int u = 0; u < 2; ++u)
        for (int w = 0; w < 2; ++w)
          for (int r = 0; r < a.dr; ++r) m(l * 2 + u, w * a.dr + r) = a.at(l, 2 * u + w, r);
    const Charge none{};
    for (int l = 0; l < a.dl; ++l)
      for (int u = 0; u < 2; ++u)
        rq[l * 2 + u] = mps.bonds[p][l] + (mps.symmetric ? Charge{u, 0} : none);
    for (int w = 0; w < 2; ++w)
      for (int r = 0; r < a.dr; ++r)
        cq[w * a.dr + r] = mps.bonds[p + 1][r] - (mps.symmetric ? Charge{0, w} : none);
    BlockedSvd svd = blocked_svd(m, rq, cq, INT_MAX, kZeroDrop);
    const int k = std::max<int>(1, static_cast<int>(svd.s.size()));
    if (svd.s.size() == 0) {
      // zero tensor; keep a zero bond of size one
      out.sites[2 * p] = SiteTensor(a.dl, 2, 1);
      out.sites[2 * p + 1] = SiteTensor(1, 2, a.dr);
      out.bonds[2 * p + 1] = {Charge{}};
    } else {
      out.sites[2 * p] = from_rows(svd.u, a.dl, 2, k);
      out.sites[2 * p + 1] = from_right_rows(svd.s.asDiagonal() * svd.vt, k, 2, a.dr);
      out.bonds[2 * p + 1] = svd.charges;
    }
    out.bonds[2 * p] = mps.bonds[p];
  }
  out.bonds[2 * n] = mps.bonds[n];
  out.center = -1;
  return out;
}

double expectation(const Mps& mps, const SparseHamiltonian& h) {
  const Vector v = to_statevector(mps);
  return expectation(h, v);
}

namespace {

template <class T>
void put(std::ostream& os, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  unsigned char buf[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof(T))) throw FormatError("truncated MPS snapshot");
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

constexpr char kMagic[8] = {'T', 'N', 'Q', 'E', 'M', 'P', 'S', '\0'};
constexpr std::uint32_t kSnapshotVersion = 1;

}  // namespace

void save_mps(const Mps& mps, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot write " + path.string());
  os.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(os, kSnapshotVersion);
  put<std::int32_t>(os, mps.n_sites());
  put<std::int32_t>(os, mps.d);
  put<std::int32_t>(os, mps.sector.up);
  put<std::int32_t>(os, mps.sector.dn);
  put<std::int32_t>(os, mps.symmetric ? 1 : 0);
  put<std::int32_t>(os, mps.center);
  for (const auto& b : mps.bonds) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(b.size()));
    for (const auto& c : b) {
      put<std::int32_t>(os, c.up);
      put<std::int32_t>(os, c.dn);
    }
  }
  for (const auto& s : mps.sites) {
    put<std::uint32_t>(os, s.dl);
    put<std::uint32_t>(os, s.d);
    put<std::uint32_t>(os, s.dr);
    for (double v : s.data) put<double>(os, v);
  }
}

Mps load_mps(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path.string());
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw FormatError("not an MPS snapshot");
  if (get<std::uint32_t>(is) != kSnapshotVersion) throw FormatError("unsupported snapshot version");
  Mps m;
  const int n = get<std::int32_t>(is);
  m.d = get<std::int32_t>(is);
  m.sector.up = get<std::int32_t>(is);
  m.sector.dn = get<std::int32_t>(is);
  m.symmetric = get<std::int32_t>(is) != 0;
  m.center = get<std::int32_t>(is);
  if (n < 1 || n > 64 || (m.d != 2 && m.d != 4)) throw FormatError("bad snapshot header");
  m.bonds.resize(n + 1);
  for (auto& b : m.bonds) {
    const auto dim = get<std::uint32_t>(is);
    if (dim > 1u << 20) throw FormatError("bad bond dimension");
    b.resize(dim);
    for (auto& c : b) {
      c.up = get<std::int32_t>(is);
      c.dn = get<std::int32_t>(is);
    }
  }
  m.sites.resize(n);
  for (int i = 0; i < n; ++i) {
    const int dl = static_cast<int>(get<std::uint32_t>(is));
    const int d = static_cast<int>(get<std::uint32_t>(is));
    const int dr = static_cast<int>(get<std::uint32_t>(is));
    if (dl != m.bond_dim(i) || dr != m.bond_dim(i + 1) || d != m.d) throw FormatError("inconsistent site shape");
    SiteTensor t(dl, d, dr);
    for (double& v : t.data) v = get<double>(is);
    m.sites[i] = std::move(t);
  }
  return m;
}

}  // namespace tnqe
