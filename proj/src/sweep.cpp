#include "tnqe/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

namespace tnqe {

const char* to_string(RotationType r) {
  switch (r) {
    case RotationType::none: return "none";
    case RotationType::fswap: return "fswap";
    case RotationType::givens: return "givens";
  }
  return "?";
}

void SweepConfig::validate() const {
  if (e_tol < 0.0) throw PreconditionError("e_tol must be non-negative");
  if (nreps < 0) throw PreconditionError("nreps must be non-negative");
  if (chi_max < 1) throw PreconditionError("chi_max must be positive");
  if (theta.grid_points < 3) throw PreconditionError("theta grid needs at least 3 points");
}

TwoSiteTensor apply_gate(const TwoSiteTensor& t, const Matrix& gate) {
  const int dd = t.d * t.d;
  if (gate.rows() != dd || gate.cols() != dd) throw PreconditionError("gate size does not match d");
  TwoSiteTensor out = t;
  Vector v(dd);
  for (int l = 0; l < t.dl; ++l)
    for (int r = 0; r < t.dr; ++r) {
      for (int k = 0; k < dd; ++k) v[k] = t.data[t.index(l, k / t.d, k % t.d, r)];
      const Vector w = gate * v;
      for (int k = 0; k < dd; ++k) out.data[t.index(l, k / t.d, k % t.d, r)] = w[k];
    }
  return out;
}

FswapTrial fswap_trial(const TwoSiteTensor& t, int chi_max) {
  FswapTrial r;
  r.xi = svd_split(t, chi_max).xi;
  r.swapped = apply_gate(t, gate_matrix(GateKind::fswap, 0.0, t.d));
  r.xi_swapped = svd_split(r.swapped, chi_max).xi;
  // retained weight 1 - xi must grow strictly
  r.accept = r.xi_swapped < r.xi - 1e-12;
  return r;
}

ThetaResult optimize_theta(const TwoSiteTensor& t, int chi_max, const ThetaSearch& opt) {
  const double half = std::numbers::pi / 2;
  auto xi_at = [&](double th) {
    return svd_split(apply_gate(t, gate_matrix(GateKind::givens, th, t.d)), chi_max).xi;
  };
  const int n = opt.grid_points;
  const double step = 2 * half / (n - 1);
  ThetaResult best{0.0, xi_at(0.0)};
  const double xi0 = best.xi;
  for (int i = 0; i < n; ++i) {
    const double th = -half + i * step;
    const double x = xi_at(th);
    if (x < best.xi) best = {th, x};
  }
  double a = std::max(-half, best.theta - step), b = std::min(half, best.theta + step);
  const double g = (std::sqrt(5.0) - 1) / 2;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = xi_at(c), fd = xi_at(d);
  while (b - a > opt.tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = xi_at(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = xi_at(d);
    }
  }
  const double mid = 0.5 * (a + b);
  const double fm = xi_at(mid);
  if (fm < best.xi) best = {mid, fm};
  if (best.xi >= xi0 - 1e-12) best = {0.0, xi0};
  return best;
}

Matrix rotation_block_matrix(const Matrix& gate, const OneHotBasis& basis) {
  const int n = basis.size();
  Matrix g = Matrix::Zero(n, n);
  if (basis.kind == BasisKind::whole) return Matrix::Identity(1, 1);
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k) {
      const auto& a = basis.tuples[m];
      const auto& b = basis.tuples[k];
      if (a[0] != b[0] || a[3] != b[3]) continue;
      g(m, k) = gate(a[1] * basis.d + a[2], b[1] * basis.d + b[2]);
    }
  return g;
}

SingleSiteMap single_site_isometry(const OneHotBasis& basis, const SiteTensor& fixed,
                                   const std::vector<Charge>& mid, bool free_left) {
  if (basis.kind != BasisKind::two_site) throw PreconditionError("single-site map needs a two-site basis");
  const int d = basis.d;
  if (free_left ? right_orth_error(fixed) > 1e-8 : left_orth_error(fixed) > 1e-8)
    throw PreconditionError("fixed tensor is not orthogonal");
  const int chi = static_cast<int>(mid.size());
  if (free_left ? (fixed.dl != chi || fixed.dr != basis.dr) : (fixed.dr != chi || fixed.dl != basis.dl))
    throw PreconditionError("fixed tensor does not fit the basis");
  auto local = [&](int site, int k) { return basis.symmetric ? fock::local_charge(d, site, k) : Charge{}; };
  std::vector<int> col(std::size_t(basis.dl) * d * d * basis.dr, -1);
  auto idx = [&](int l, int k1, int k2, int r) { return ((std::size_t(l) * d + k1) * d + k2) * basis.dr + r; };
  for (int m = 0; m < basis.size(); ++m) {
    const auto& q = basis.tuples[m];
    col[idx(q[0], q[1], q[2], q[3])] = m;
  }
  SingleSiteMap out;
  if (free_left) {
    for (int l = 0; l < basis.dl; ++l)
      for (int k = 0; k < d; ++k)
        for (int a = 0; a < chi; ++a)
          if (!basis.symmetric || basis.left[l] + local(basis.p, k) == mid[a]) out.tuples.push_back({l, k, a});
  } else {
    for (int a = 0; a < chi; ++a)
      for (int k = 0; k < d; ++k)
        for (int r = 0; r < basis.dr; ++r)
          if (!basis.symmetric || mid[a] + local(basis.p + 1, k) == basis.right[r]) out.tuples.push_back({a, k, r});
  }
  out.t = Matrix::Zero(out.tuples.size(), basis.size());
  for (std::size_t i = 0; i < out.tuples.size(); ++i) {
    const auto& q = out.tuples[i];
    if (free_left) {
      for (int k2 = 0; k2 < d; ++k2)
        for (int r = 0; r < basis.dr; ++r) {
          const int c = col[idx(q[0], q[1], k2, r)];
          if (c >= 0) out.t(i, c) = fixed.at(q[2], k2, r);
        }
    } else {
      for (int l = 0; l < basis.dl; ++l)
        for (int k1 = 0; k1 < d; ++k1) {
          const int c = col[idx(l, k1, q[1], q[2])];
          if (c >= 0) out.t(i, c) = fixed.at(l, k1, q[0]);
        }
    }
  }
  return out;
}

namespace {

TwoSiteTensor recombine(const SplitResult& s, const TwoSiteTensor& like) {
  TwoSiteTensor t = like;
  RowMatrix m = RowMatrix(s.left.as_left()) * s.sigma.asDiagonal() * RowMatrix(s.right.as_right());
  std::copy(m.data(), m.data() + m.size(), t.data.begin());
  return t;
}

void discard_and_solve(SubspacePencil& p, const SweepConfig& cfg, GeeSolution& sol) {
  discard_columns(p, cfg.solver.lin_dep_tol, cfg.solver.cond_max);
  sol = solve_gee(p, cfg.solver.eps_sv, cfg.solver.mode);
}

}  // namespace

GeeSolution evaluate_state(TnqeState& state, const SweepConfig& cfg) {
  if (!state.h) throw StateError("state has no Hamiltonian");
  const int m = state.m();
  std::vector<OneHotBasis> bases;
  for (int j = 0; j < m; ++j) bases.push_back(whole_basis(j));
  std::vector<PencilBlock> blocks;
  for (int j = 0; j < m; ++j) blocks.push_back({&state.refs[j], &bases[j], &state.registry.network(j)});
  SubspacePencil p = assemble_pencil(blocks, *state.h, cfg.noise, state.noise_stream++, cfg.jobs);
  state.qpu_calls += p.qpu_calls;
  GeeSolution sol;
  discard_and_solve(p, cfg, sol);
  state.c = sol.c.col(0);
  state.e1 = sol.energies[0];
  return sol;
}

SweepReport generalized_sweep(TnqeState& state, const SweepConfig& cfg) {
  cfg.validate();
  if (!state.h) throw StateError("state has no Hamiltonian");
  const int m = state.m();
  if (m == 0) throw StateError("state has no references");
  for (int j : cfg.jset)
    if (j < 0 || j >= m) throw PreconditionError("jset entry out of range");
  for (const auto& r : state.refs)
    if (r.sector != state.sector || r.n_sites() != state.refs[0].n_sites())
      throw PreconditionError("references disagree on sector or length");
  if (state.registry.size() != m) throw StateError("registry size does not match the references");

  using clock = std::chrono::steady_clock;
  const auto t_sweep = clock::now();
  const int n = state.refs[0].n_sites();
  const int d = state.refs[0].d;
  std::vector<char> in_jset(m, 0);
  for (int j : cfg.jset) in_jset[j] = 1;

  SweepReport rep;
  for (int p = 0; p + 1 < n; ++p) {
    const auto t_bond = clock::now();
    BondRecord rec;
    rec.p = p;
    rec.e_old = state.e1;
    rec.refs = cfg.jset;
    const std::vector<Mps> saved = state.refs;
    std::vector<Matrix> saved_u(m);
    for (int j = 0; j < m; ++j) saved_u[j] = state.registry.u(j);

    std::vector<OneHotBasis> bases(m);
    for (int j = 0; j < m; ++j) {
      if (in_jset[j]) {
        canonicalize(state.refs[j], p);
        bases[j] = one_hot_decompose(state.refs[j], p, j);
      } else {
        bases[j] = whole_basis(j);
      }
    }
    std::vector<PencilBlock> blocks;
    for (int j = 0; j < m; ++j) blocks.push_back({&state.refs[j], &bases[j], &state.registry.network(j)});
    SubspacePencil pencil = assemble_pencil(blocks, *state.h, cfg.noise, state.noise_stream++, cfg.jobs);
    state.qpu_calls += pencil.qpu_calls;
    state.batches += 1;
    rec.qpu_calls = pencil.qpu_calls;

    auto finish = [&](bool accepted) {
      rec.accepted = accepted;
      if (!accepted) {
        state.refs = saved;
        for (int j = 0; j < m; ++j) state.registry.set(j, saved_u[j]);
      }
      rec.seconds = std::chrono::duration<double>(clock::now() - t_bond).count();
      rep.qpu_calls += rec.qpu_calls;
      rep.bonds.push_back(rec);
    };

    GeeSolution sol;
    try {
      discard_and_solve(pencil, cfg, sol);
    } catch (const DegeneratePencilError& e) {
      rec.skipped = true;
      rec.note = e.what();
      rec.e_new = rec.e_old;
      finish(false);
      continue;
    }
    rec.e_pencil = sol.energies[0];
    rec.retained = pencil.retained_count();

    // parameter update
    std::vector<TwoSiteTensor> t(m);
    for (int j : cfg.jset) {
      const auto slice = update_two_site(pencil, j, sol);
      t[j] = tensor_from_coefficients(bases[j], slice ? *slice : bases[j].t);
    }

    // orbital rotations
    std::vector<Matrix> maps(m);
    for (int j = 0; j < m; ++j) maps[j] = Matrix::Identity(bases[j].size(), bases[j].size());
    rec.theta.assign(cfg.jset.size(), 0.0);
    rec.swapped.assign(cfg.jset.size(), 0);
    for (std::size_t q = 0; q < cfg.jset.size(); ++q) {
      const int j = cfg.jset[q];
      if (cfg.rotation == RotationType::fswap) {
        FswapTrial tr = fswap_trial(t[j], cfg.chi_max);
        if (tr.accept) {
          t[j] = std::move(tr.swapped);
          state.registry.merge(j, p, GateKind::fswap);
          maps[j] = rotation_block_matrix(gate_matrix(GateKind::fswap, 0.0, d), bases[j]);
          rec.swapped[q] = 1;
        }
      } else if (cfg.rotation == RotationType::givens) {
        const ThetaResult th = optimize_theta(t[j], cfg.chi_max, cfg.theta);
        if (th.theta != 0.0) {
          const Matrix g = gate_matrix(GateKind::givens, th.theta, d);
          t[j] = apply_gate(t[j], g);
          state.registry.merge(j, p, GateKind::givens, -th.theta);
          maps[j] = rotation_block_matrix(g, bases[j]);
          rec.theta[q] = th.theta;
        }
      }
    }

    // truncation
    std::vector<Vector> x(m);
    for (int j : cfg.jset) {
      const SplitResult s = svd_split(t[j], cfg.chi_max);
      rec.xi.push_back(s.xi);
      x[j] = coefficients_of(bases[j], recombine(s, t[j]));
      x[j].normalize();
    }
    const SubspacePencil rotated = transform_pencil(pencil, maps);

    // single-site passes on the rotated pencil, no new matrix elements
    for (int r = 0; r < 2 * cfg.nreps && !cfg.jset.empty(); ++r) {
      const bool free_left = (r % 2 == 0);
      std::vector<Matrix> tmaps(m);
      for (int j = 0; j < m; ++j) {
        if (!in_jset[j]) {
          tmaps[j] = Matrix::Identity(1, 1);
          continue;
        }
        const SplitResult s = svd_split(tensor_from_coefficients(bases[j], x[j]), cfg.chi_max);
        tmaps[j] = single_site_isometry(bases[j], free_left ? s.right : s.left, s.bond, free_left).t;
      }
      SubspacePencil single = transform_pencil(rotated, tmaps);
      GeeSolution s1;
      try {
        discard_and_solve(single, cfg, s1);
      } catch (const DegeneratePencilError& e) {
        rec.note = std::string("single-site pass skipped: ") + e.what();
        break;
      }
      for (int j : cfg.jset) {
        const auto y = update_two_site(single, j, s1);
        if (!y) continue;
        x[j] = tmaps[j].transpose() * *y;
        x[j].normalize();
      }
    }

    // write back with the center moved to p+1
    for (int j : cfg.jset) {
      const TwoSiteTensor tj = tensor_from_coefficients(bases[j], x[j]);
      const SplitResult s = svd_split(tj, cfg.chi_max);
      put_two_site(state.refs[j], p, s, true);
      x[j] = coefficients_of(bases[j], recombine(s, tj));
    }

    // reduced M x M pencil
    Matrix y = Matrix::Zero(rotated.dim(), m);
    for (int j = 0; j < m; ++j) {
      if (in_jset[j])
        y.block(rotated.block_offset[j], j, bases[j].size(), 1) = x[j];
      else
        y(rotated.block_offset[j], j) = 1.0;
    }
    SubspacePencil reduced;
    reduced.h = y.transpose() * rotated.h * y;
    reduced.s = y.transpose() * rotated.s * y;
    reduced.s.diagonal().setOnes();
    for (int j = 0; j < m; ++j) {
      reduced.block_ref.push_back(j);
      reduced.block_offset.push_back(j);
      reduced.block_size.push_back(1);
    }
    reduced.retained.assign(m, 1);
    GeeSolution sr;
    try {
      discard_and_solve(reduced, cfg, sr);
    } catch (const DegeneratePencilError& e) {
      rec.skipped = true;
      rec.note = e.what();
      rec.e_new = rec.e_old;
      finish(false);
      continue;
    }
    rec.e_new = sr.energies[0];
    const bool accept = rec.e_new < rec.e_old + cfg.e_tol;
    if (accept) {
      state.c = sr.c.col(0);
      state.e1 = rec.e_new;
    }
    finish(accept);
  }
  rep.e_final = state.e1;
  rep.seconds = std::chrono::duration<double>(clock::now() - t_sweep).count();
  return rep;
}

double represented_energy(const TnqeState& state) {
  if (!state.h) throw StateError("state has no Hamiltonian");
  RotationRegistry reg = state.registry;
  Vector psi;
  for (int j = 0; j < state.m(); ++j) {
    Vector v = to_statevector(state.refs[j]);
    apply_rotation_network(v, reg.network(j));
    if (j == 0)
      psi = state.c[j] * v;
    else
      psi += state.c[j] * v;
  }
  return expectation(*state.h, psi);
}

}  // namespace tnqe
