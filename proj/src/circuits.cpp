#include "tnqe/circuits.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "tnqe/kernels.hpp"

namespace tnqe {

void Netlist::validate(double tol) const {
  for (const auto& g : gates) {
    const int k = g.two_qubit() ? 4 : 2;
    if (g.m.rows() != k || g.m.cols() != k) throw PreconditionError("gate matrix has the wrong size");
    if ((g.m.transpose() * g.m - Matrix::Identity(k, k)).cwiseAbs().maxCoeff() > tol)
      throw PreconditionError("gate matrix is not orthogonal");
    auto in_range = [&](int q) { return q >= 0 && q < n_qubits; };
    if (!in_range(g.q0) || (g.two_qubit() && !in_range(g.q1)) || (g.control >= 0 && !in_range(g.control)))
      throw PreconditionError("gate qubit out of range");
    if (g.q0 == g.q1 || g.control == g.q0 || (g.two_qubit() && g.control == g.q1))
      throw PreconditionError("gate addresses the same qubit twice");
  }
}

int Netlist::two_qubit_count() const {
  int n = 0;
  for (const auto& g : gates) n += g.two_qubit() || g.control >= 0;
  return n;
}

Matrix cx_matrix() {
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1.0;
  return m;
}

Matrix cz_matrix() {
  Matrix m = Matrix::Identity(4, 4);
  m(3, 3) = -1.0;
  return m;
}

namespace {

std::size_t mask_of(int n, int q) { return std::size_t{1} << (n - 1 - q); }

Matrix rot2(double phi) {
  Matrix r(2, 2);
  r << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
  return r;
}

}  // namespace

void apply_gate(Vector& psi, int n, const CircuitGate& g, bool transpose) {
  if (psi.size() != (Eigen::Index{1} << n)) throw PreconditionError("statevector size does not match");
  const Matrix m = transpose ? Matrix(g.m.transpose()) : g.m;
  double buf[16];
  const std::size_t dim = psi.size();
  if (g.two_qubit()) {
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) buf[4 * i + j] = m(i, j);
    const std::size_t hi = mask_of(n, g.q0), lo = mask_of(n, g.q1);
    if (g.control < 0) {
      kernels::apply_pair(psi.data(), dim, hi, lo, buf);
      return;
    }
    const std::size_t c = mask_of(n, g.control), both = hi | lo;
    for (std::size_t i = 0; i < dim; ++i) {
      if (!(i & c) || (i & both)) continue;
      double* p = psi.data();
      const double a0 = p[i], a1 = p[i | lo], a2 = p[i | hi], a3 = p[i | both];
      p[i] = buf[0] * a0 + buf[1] * a1 + buf[2] * a2 + buf[3] * a3;
      p[i | lo] = buf[4] * a0 + buf[5] * a1 + buf[6] * a2 + buf[7] * a3;
      p[i | hi] = buf[8] * a0 + buf[9] * a1 + buf[10] * a2 + buf[11] * a3;
      p[i | both] = buf[12] * a0 + buf[13] * a1 + buf[14] * a2 + buf[15] * a3;
    }
    return;
  }
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) buf[2 * i + j] = m(i, j);
  const std::size_t t = mask_of(n, g.q0);
  if (g.control < 0) {
    kernels::apply_single(psi.data(), dim, t, buf);
    return;
  }
  const std::size_t c = mask_of(n, g.control);
  for (std::size_t i = 0; i < dim; ++i) {
    if (!(i & c) || (i & t)) continue;
    const double a0 = psi[i], a1 = psi[i | t];
    psi[i] = buf[0] * a0 + buf[1] * a1;
    psi[i | t] = buf[2] * a0 + buf[3] * a1;
  }
}

void apply_netlist(Vector& psi, int n, const Netlist& net) {
  if (net.n_qubits > n) throw PreconditionError("netlist wider than the register");
  for (const auto& g : net.gates) apply_gate(psi, n, g);
}

void apply_netlist_inverse(Vector& psi, int n, const Netlist& net) {
  if (net.n_qubits > n) throw PreconditionError("netlist wider than the register");
  for (auto it = net.gates.rbegin(); it != net.gates.rend(); ++it) apply_gate(psi, n, *it, true);
}

Vector prepare_state(const Netlist& net) {
  if (net.n_qubits > 24) throw ResourceError("statevector simulation capped at 24 qubits");
  Vector psi = Vector::Zero(Eigen::Index{1} << net.n_qubits);
  psi[0] = 1.0;
  apply_netlist(psi, net.n_qubits, net);
  return psi;
}

namespace {

// Fill the free columns of a 4x4 matrix with an orthonormal completion of the
// given columns (taken from the standard basis, in order).
Matrix complete_columns(const std::vector<std::pair<int, Vector>>& fixed) {
  Matrix out = Matrix::Zero(4, 4);
  std::vector<Vector> basis;
  std::vector<char> used(4, 0);
  for (const auto& [pos, v] : fixed) {
    Vector w = v;
    for (const auto& b : basis) w -= b.dot(w) * b;
    const double nn = w.norm();
    if (nn < 1e-12) throw NumericalError("staircase columns are not independent");
    w /= nn;
    basis.push_back(w);
    out.col(pos) = w;
    used[pos] = 1;
  }
  int e = 0;
  for (int pos = 0; pos < 4; ++pos) {
    if (used[pos]) continue;
    for (; e < 4; ++e) {
      Vector w = Vector::Unit(4, e);
      for (const auto& b : basis) w -= b.dot(w) * b;
      for (const auto& b : basis) w -= b.dot(w) * b;
      const double nn = w.norm();
      if (nn > 1e-6) {
        w /= nn;
        basis.push_back(w);
        out.col(pos) = w;
        ++e;
        break;
      }
    }
  }
  return out;
}

}  // namespace

Netlist staircase_from_mps(const Mps& in) {
  if (in.d != 2) throw PreconditionError("staircase compilation needs d=2 sites");
  Mps mps = in;
  canonicalize(mps, 0);
  normalize(mps);
  const int n = mps.n_sites();
  for (int b = 0; b <= n; ++b)
    if (mps.bond_dim(b) > 2) throw PreconditionError("staircase needs bond dimension at most 2");
  Netlist net;
  net.n_qubits = n;
  if (n == 1) {
    Matrix g(2, 2);
    Vector v(2);
    v << mps.sites[0].at(0, 0, 0), mps.sites[0].at(0, 1, 0);
    v.normalize();
    g << v[0], -v[1], v[1], v[0];
    net.gates.push_back({0, -1, g, -1});
    return net;
  }
  for (int i = 0; i + 1 < n; ++i) {
    const SiteTensor& a = mps.sites[i];
    std::vector<std::pair<int, Vector>> cols;
    for (int l = 0; l < a.dl; ++l) {
      Vector c = Vector::Zero(4);
      if (i + 2 < n) {
        for (int s = 0; s < 2; ++s)
          for (int r = 0; r < a.dr; ++r) c[2 * s + r] = a.at(l, s, r);
      } else {
        const SiteTensor& b = mps.sites[i + 1];
        for (int s = 0; s < 2; ++s)
          for (int t = 0; t < 2; ++t)
            for (int r = 0; r < a.dr; ++r) c[2 * s + t] += a.at(l, s, r) * b.at(r, t, 0);
      }
      cols.push_back({2 * l, c});
    }
    net.gates.push_back({i, i + 1, complete_columns(cols), -1});
  }
  return net;
}

namespace {

Matrix environment(const Vector& alpha, const Vector& beta, int n, const CircuitGate& g) {
  const std::size_t dim = alpha.size();
  if (g.two_qubit()) {
    const std::size_t hi = mask_of(n, g.q0), lo = mask_of(n, g.q1), both = hi | lo;
    const std::size_t off[4] = {0, lo, hi, both};
    Matrix e = Matrix::Zero(4, 4);
    for (std::size_t i = 0; i < dim; ++i) {
      if (i & both) continue;
      for (int a = 0; a < 4; ++a) {
        const double x = alpha[i | off[a]];
        if (x == 0.0) continue;
        for (int b = 0; b < 4; ++b) e(a, b) += x * beta[i | off[b]];
      }
    }
    return e;
  }
  const std::size_t t = mask_of(n, g.q0);
  Matrix e = Matrix::Zero(2, 2);
  for (std::size_t i = 0; i < dim; ++i) {
    if (i & t) continue;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) e(a, b) += alpha[i | (a ? t : 0)] * beta[i | (b ? t : 0)];
  }
  return e;
}

// Coordinate ascent on <target| g_K ... g_1 |0>; returns the final overlap.
double reoptimize(std::vector<CircuitGate>& gates, const Vector& target, int n, int iters, double stop) {
  const int k = static_cast<int>(gates.size());
  Vector zero = Vector::Zero(target.size());
  zero[0] = 1.0;
  double overlap = 0.0;
  for (int it = 0; it < iters; ++it) {
    std::vector<Vector> alpha(k + 1);
    alpha[k] = target;
    for (int g = k - 1; g >= 0; --g) {
      alpha[g] = alpha[g + 1];
      apply_gate(alpha[g], n, gates[g], true);
    }
    Vector beta = zero;
    for (int g = 0; g < k; ++g) {
      const Matrix e = environment(alpha[g + 1], beta, n, gates[g]);
      if (e.norm() > 1e-300) {
        Eigen::JacobiSVD<Matrix> svd(e, Eigen::ComputeFullU | Eigen::ComputeFullV);
        gates[g].m = svd.matrixU() * svd.matrixV().transpose();
      }
      apply_gate(beta, n, gates[g]);
    }
    const double prev = overlap;
    overlap = target.dot(beta);
    if (it > 0 && std::abs(overlap - prev) < 1e-15) break;
    if (1.0 - overlap * overlap < stop) break;
  }
  if (iters == 0) {
    Vector beta = zero;
    for (const auto& g : gates) apply_gate(beta, n, g);
    overlap = target.dot(beta);
  }
  return overlap;
}

}  // namespace

CompileResult disentangler_compile(const Vector& psi, int n, int d_max, int reopt_iters, double stop,
                                   int final_iters) {
  if (n < 1 || psi.size() != (Eigen::Index{1} << n)) throw PreconditionError("statevector size does not match");
  if (n > 20) throw ResourceError("compilation capped at 20 qubits");
  if (d_max < 1) throw PreconditionError("need at least one layer");
  const Vector target = psi.normalized();
  CompileResult out;
  std::vector<CircuitGate> gates;
  Vector residual = target;
  double fid = target[0] * target[0];
  for (int layer = 0; layer < d_max; ++layer) {
    Mps m2 = mps_from_statevector(residual, n, 2, 2);
    Netlist l = staircase_from_mps(m2);
    Vector trial = residual;
    apply_netlist_inverse(trial, n, l);
    if (trial[0] * trial[0] < fid) {
      for (auto& g : l.gates) g.m = Matrix::Identity(g.m.rows(), g.m.cols());
    }
    gates.insert(gates.begin(), l.gates.begin(), l.gates.end());
    const bool last = layer + 1 == d_max;
    const double ov = reoptimize(gates, target, n, reopt_iters + (last ? final_iters : 0), stop);
    fid = ov * ov;
    out.fidelity_per_layer.push_back(fid);
    out.layers = layer + 1;
    residual = target;
    for (auto it = gates.rbegin(); it != gates.rend(); ++it) apply_gate(residual, n, *it, true);
    fid = residual[0] * residual[0];
    if (1.0 - fid < stop) break;
  }
  out.netlist.n_qubits = n;
  out.netlist.gates = std::move(gates);
  out.fidelity = fid;
  return out;
}

CompileResult disentangler_compile(const Mps& mps, int d_max, int reopt_iters, double stop, int final_iters) {
  if (mps.d != 2) throw PreconditionError("compilation needs d=2 sites");
  return disentangler_compile(to_statevector(mps), mps.n_sites(), d_max, reopt_iters, stop, final_iters);
}

namespace {

struct SchurRoot {
  Matrix q;       // orthogonal
  double phi[2];  // rotation angles of the two 2x2 blocks
};

SchurRoot real_schur_blocks(const Matrix& u) {
  Eigen::RealSchur<Matrix> rs(u);
  const Matrix& t = rs.matrixT();
  const Matrix& z = rs.matrixU();
  std::vector<std::pair<double, std::vector<int>>> rots;
  std::vector<int> plus, minus;
  for (int i = 0; i < 4;) {
    if (i < 3 && t(i + 1, i) != 0.0) {
      rots.push_back({std::atan2(t(i + 1, i), t(i, i)), {i, i + 1}});
      i += 2;
    } else {
      (t(i, i) > 0 ? plus : minus).push_back(i);
      ++i;
    }
  }
  if (plus.size() % 2 || minus.size() % 2) throw NumericalError("real Schur blocks cannot be paired");
  for (std::size_t a = 0; a < plus.size(); a += 2) rots.push_back({0.0, {plus[a], plus[a + 1]}});
  for (std::size_t a = 0; a < minus.size(); a += 2) rots.push_back({M_PI, {minus[a], minus[a + 1]}});
  SchurRoot r;
  r.q = Matrix(4, 4);
  for (int b = 0; b < 2; ++b) {
    r.phi[b] = rots[b].first;
    r.q.col(2 * b) = z.col(rots[b].second[0]);
    r.q.col(2 * b + 1) = z.col(rots[b].second[1]);
  }
  return r;
}

Matrix block_rotation(const double phi[2], double scale) {
  Matrix d = Matrix::Zero(4, 4);
  d.block(0, 0, 2, 2) = rot2(scale * phi[0]);
  d.block(2, 2, 2, 2) = rot2(scale * phi[1]);
  return d;
}

void lift_special(Netlist& out, const CircuitGate& g, const Matrix& u, int anc) {
  const SchurRoot s = real_schur_blocks(u);
  const Matrix check = s.q * block_rotation(s.phi, 1.0) * s.q.transpose();
  if ((check - u).cwiseAbs().maxCoeff() > 1e-9) throw NumericalError("real Schur reconstruction failed");
  out.gates.push_back({g.q0, g.q1, s.q.transpose(), -1});
  out.gates.push_back({anc, g.q1, cx_matrix(), -1});
  out.gates.push_back({g.q0, g.q1, block_rotation(s.phi, -0.5), -1});
  out.gates.push_back({anc, g.q1, cx_matrix(), -1});
  out.gates.push_back({g.q0, g.q1, s.q * block_rotation(s.phi, 0.5), -1});
}

}  // namespace

Netlist controlled_lift(const Netlist& net, int ancilla) {
  net.validate();
  Netlist out;
  const int anc = ancilla < 0 ? net.n_qubits : ancilla;
  out.n_qubits = std::max(net.n_qubits, anc + 1);
  Matrix z(2, 2);
  z << 1, 0, 0, -1;
  for (const auto& g : net.gates) {
    if (g.control >= 0) throw PreconditionError("netlist already contains controlled gates");
    if (g.q0 == anc || g.q1 == anc) throw PreconditionError("ancilla collides with a system qubit");
    if (!g.two_qubit()) {
      Matrix r = g.m;
      if (r.determinant() < 0) {
        out.gates.push_back({anc, g.q0, cz_matrix(), -1});
        r = r * z;
      }
      const double phi = std::atan2(r(1, 0), r(0, 0));
      out.gates.push_back({anc, g.q0, cx_matrix(), -1});
      out.gates.push_back({g.q0, -1, rot2(-phi / 2), -1});
      out.gates.push_back({anc, g.q0, cx_matrix(), -1});
      out.gates.push_back({g.q0, -1, rot2(phi / 2), -1});
      continue;
    }
    if (g.m.determinant() > 0) {
      lift_special(out, g, g.m, anc);
      continue;
    }
    // det -1: U = -(V F) with F = diag(1,1,1,-1) and det V = +1; the
    // controlled F stays a control-tagged gate and the sign goes to a Z on
    // the ancilla.
    const Matrix f = cz_matrix();
    out.gates.push_back({g.q0, g.q1, f, anc});
    lift_special(out, g, -g.m * f, anc);
    out.gates.push_back({anc, -1, z, -1});
  }
  return out;
}

double hadamard_test(const Netlist& u_i, const Netlist& u_j, const GivensNetwork* rotation, const std::string& pauli) {
  int nq = std::max(u_i.n_qubits, u_j.n_qubits);
  if (rotation) {
    const int rq = rotation->d == 4 ? 2 * rotation->n : rotation->n;
    if (nq != rq) throw PreconditionError("rotation and circuits disagree on the qubit count");
  }
  if (!pauli.empty() && static_cast<int>(pauli.size()) != nq)
    throw PreconditionError("Pauli string length does not match the qubit count");
  const int n = nq + 1;
  const int anc = nq;
  if (n > 24) throw ResourceError("statevector simulation capped at 24 qubits");
  Vector psi = Vector::Zero(Eigen::Index{1} << n);
  psi[0] = 1.0;
  Matrix h(2, 2);
  h << 1, 1, 1, -1;
  h /= std::sqrt(2.0);
  apply_gate(psi, n, {anc, -1, h, -1});
  for (auto g : u_i.gates) {
    if (g.control >= 0) throw PreconditionError("input circuits must be uncontrolled");
    g.control = anc;
    apply_gate(psi, n, g);
  }
  if (rotation) {
    const Eigen::Index half = Eigen::Index{1} << nq;
    for (int a = 0; a < 2; ++a) {
      Vector b(half);
      for (Eigen::Index s = 0; s < half; ++s) b[s] = psi[2 * s + a];
      apply_rotation_network(b, *rotation);
      for (Eigen::Index s = 0; s < half; ++s) psi[2 * s + a] = b[s];
    }
  }
  int ny = 0;
  for (int q = 0; q < static_cast<int>(pauli.size()); ++q) {
    Matrix m(2, 2);
    switch (pauli[q]) {
      case 'I': continue;
      case 'X': m << 0, 1, 1, 0; break;
      case 'Z': m << 1, 0, 0, -1; break;
      case 'Y': m << 0, -1, 1, 0; ++ny; break;  // Y = i * m
      default: throw PreconditionError(std::string("unknown Pauli letter '") + pauli[q] + "'");
    }
    apply_gate(psi, n, {q, -1, m, anc});
  }
  // An odd number of Y factors leaves a purely imaginary controlled branch.
  if (ny % 2) return 0.0;
  if ((ny / 2) % 2) {
    for (Eigen::Index i = 1; i < psi.size(); i += 2) psi[i] = -psi[i];
  }
  for (auto it = u_j.gates.rbegin(); it != u_j.gates.rend(); ++it) {
    CircuitGate g = *it;
    if (g.control >= 0) throw PreconditionError("input circuits must be uncontrolled");
    g.control = anc;
    apply_gate(psi, n, g, true);
  }
  apply_gate(psi, n, {anc, -1, h, -1});
  double p0 = 0.0, p1 = 0.0;
  for (Eigen::Index i = 0; i < psi.size(); ++i) (i & 1 ? p1 : p0) += psi[i] * psi[i];
  return p0 - p1;
}

void write_netlist(const Netlist& net, std::ostream& os) {
  os << "qubits " << net.n_qubits << "\n";
  os << std::setprecision(17);
  for (const auto& g : net.gates) {
    if (g.control >= 0) os << "c" << g.control << ' ';
    os << g.q0;
    if (g.two_qubit()) os << ' ' << g.q1;
    for (int i = 0; i < g.m.rows(); ++i)
      for (int j = 0; j < g.m.cols(); ++j) os << ' ' << g.m(i, j);
    os << "\n";
  }
}

Netlist read_netlist(std::istream& is) {
  Netlist net;
  std::string line;
  int lineno = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty() || tok[0][0] == '#') continue;
    const std::string where = "netlist line " + std::to_string(lineno) + ": ";
    if (!header) {
      if (tok.size() != 2 || tok[0] != "qubits") throw FormatError(where + "expected 'qubits N'");
      net.n_qubits = std::stoi(tok[1]);
      header = true;
      continue;
    }
    CircuitGate g;
    std::size_t at = 0;
    try {
      if (tok[0][0] == 'c') {
        g.control = std::stoi(tok[0].substr(1));
        at = 1;
      }
      const std::size_t rest = tok.size() - at;
      if (rest == 18) {
        g.q0 = std::stoi(tok[at]);
        g.q1 = std::stoi(tok[at + 1]);
        g.m = Matrix(4, 4);
        for (int i = 0; i < 16; ++i) g.m(i / 4, i % 4) = std::stod(tok[at + 2 + i]);
      } else if (rest == 5) {
        g.q0 = std::stoi(tok[at]);
        g.m = Matrix(2, 2);
        for (int i = 0; i < 4; ++i) g.m(i / 2, i % 2) = std::stod(tok[at + 1 + i]);
      } else {
        throw FormatError(where + "expected 1 or 2 qubits followed by 4 or 16 entries");
      }
    } catch (const std::invalid_argument&) {
      throw FormatError(where + "bad number");
    } catch (const std::out_of_range&) {
      throw FormatError(where + "number out of range");
    }
    net.gates.push_back(std::move(g));
  }
  if (!header) throw FormatError("netlist is empty");
  net.validate(1e-8);
  return net;
}

}  // namespace tnqe
