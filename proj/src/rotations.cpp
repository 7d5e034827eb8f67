#include "tnqe/rotations.hpp"

#include <cmath>

#include "tnqe/chem_io.hpp"
#include "tnqe/hamiltonian.hpp"
#include "tnqe/kernels.hpp"

namespace tnqe {

bool GivensNetwork::swaps_only() const {
  for (const auto& g : gates)
    if (g.kind != GateKind::fswap) return false;
  return !flip_last;
}

Matrix orbital_block(GateKind kind, double theta) {
  Matrix b(2, 2);
  if (kind == GateKind::fswap) {
    b << 0, 1, 1, 0;
  } else {
    const double c = std::cos(theta), s = std::sin(theta);
    b << c, s, -s, c;
  }
  return b;
}

GivensNetwork givens_decompose(const Matrix& u, int d) {
  check_orthogonal(u, 1e-10);
  const int n = static_cast<int>(u.rows());
  GivensNetwork net;
  net.n = n;
  net.d = d;
  Matrix r = u;
  for (int c = 0; c + 1 < n; ++c) {
    for (int row = n - 1; row > c; --row) {
      const double a = r(row - 1, c), b = r(row, c);
      if (b == 0.0 && a >= 0.0) continue;
      const double theta = std::atan2(-b, a);
      const double cs = std::cos(theta), sn = std::sin(theta);
      // rows <- rho(theta)^T rows
      for (int k = 0; k < n; ++k) {
        const double x = r(row - 1, k), y = r(row, k);
        r(row - 1, k) = cs * x - sn * y;
        r(row, k) = sn * x + cs * y;
      }
      net.gates.push_back({row - 1, theta, GateKind::givens});
    }
  }
  net.flip_last = n > 0 && r(n - 1, n - 1) < 0.0;
  return net;
}

Matrix givens_reconstruct(const GivensNetwork& net) {
  Matrix u = Matrix::Identity(net.n, net.n);
  for (const auto& g : net.gates) u = merge_local(u, g.p, g.kind, g.theta);
  if (net.flip_last && net.n > 0) u.col(net.n - 1) *= -1.0;
  return u;
}

Matrix merge_local(const Matrix& u, int p, GateKind kind, double theta) {
  if (p < 0 || p + 1 >= u.cols()) throw PreconditionError("local update outside the orbital range");
  Matrix out = u;
  const Matrix b = orbital_block(kind, theta);
  out.col(p) = u.col(p) * b(0, 0) + u.col(p + 1) * b(1, 0);
  out.col(p + 1) = u.col(p) * b(0, 1) + u.col(p + 1) * b(1, 1);
  return out;
}

namespace {

Matrix qubit_gate(GateKind kind, double theta) {
  Matrix g = Matrix::Zero(4, 4);
  if (kind == GateKind::fswap) {
    g(0, 0) = 1;
    g(1, 2) = 1;
    g(2, 1) = 1;
    g(3, 3) = -1;
  } else {
    const double c = std::cos(theta), s = std::sin(theta);
    g(0, 0) = 1;
    g(1, 1) = c;
    g(1, 2) = -s;
    g(2, 1) = s;
    g(2, 2) = c;
    g(3, 3) = 1;
  }
  return g;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace

Matrix gate_matrix(GateKind kind, double theta, int d) {
  if (d == 2) return qubit_gate(kind, theta);
  if (d != 4) throw PreconditionError("local dimension must be 2 or 4");
  const Matrix I2 = Matrix::Identity(2, 2);
  const Matrix mid = kron(kron(I2, qubit_gate(GateKind::fswap, 0.0)), I2);
  const Matrix g = qubit_gate(kind, theta);
  return mid * kron(g, g) * mid;
}

void apply_qubit_pair(double* psi, int n_qubits, int q_hi, int q_lo, const Matrix& g4) {
  double m[16];
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m[4 * i + j] = g4(i, j);
  kernels::apply_pair(psi, std::size_t{1} << n_qubits, fock::qubit_mask(n_qubits, q_hi),
                      fock::qubit_mask(n_qubits, q_lo), m);
}

void apply_site_gate(double* psi, int n_qubits, int d, int p, GateKind kind, double theta,
                     bool transpose) {
  Matrix g = qubit_gate(kind, theta);
  if (transpose) g.transposeInPlace();
  if (d == 2) {
    apply_qubit_pair(psi, n_qubits, p, p + 1, g);
    return;
  }
  static const Matrix f = qubit_gate(GateKind::fswap, 0.0);
  const int q = 2 * p;
  apply_qubit_pair(psi, n_qubits, q + 1, q + 2, f);
  apply_qubit_pair(psi, n_qubits, q, q + 1, g);
  apply_qubit_pair(psi, n_qubits, q + 2, q + 3, g);
  apply_qubit_pair(psi, n_qubits, q + 1, q + 2, f);
}

namespace {

int network_qubits(const GivensNetwork& net) { return net.d == 4 ? 2 * net.n : net.n; }

void apply_flip(double* psi, int nq, const GivensNetwork& net) {
  std::uint64_t mask = 0;
  if (net.d == 4) {
    mask = fock::qubit_mask(nq, 2 * (net.n - 1)) | fock::qubit_mask(nq, 2 * (net.n - 1) + 1);
  } else {
    mask = fock::qubit_mask(nq, net.n - 1);
  }
  const std::size_t dim = std::size_t{1} << nq;
  for (std::size_t x = 0; x < dim; ++x)
    if (__builtin_popcountll(x & mask) & 1) psi[x] = -psi[x];
}

void check_dim(std::size_t size, const GivensNetwork& net) {
  if (size != (std::size_t{1} << network_qubits(net)))
    throw PreconditionError("statevector dimension does not match the network");
}

}  // namespace

void apply_rotation_network(Vector& psi, const GivensNetwork& net) {
  check_dim(psi.size(), net);
  const int nq = network_qubits(net);
  if (net.flip_last) apply_flip(psi.data(), nq, net);
  for (auto it = net.gates.rbegin(); it != net.gates.rend(); ++it)
    apply_site_gate(psi.data(), nq, net.d, it->p, it->kind, it->theta);
}

void apply_rotation_network(Matrix& cols, const GivensNetwork& net) {
  check_dim(cols.rows(), net);
  const int nq = network_qubits(net);
  for (Eigen::Index c = 0; c < cols.cols(); ++c) {
    double* psi = cols.col(c).data();
    if (net.flip_last) apply_flip(psi, nq, net);
    for (auto it = net.gates.rbegin(); it != net.gates.rend(); ++it)
      apply_site_gate(psi, nq, net.d, it->p, it->kind, it->theta);
  }
}

void apply_rotation_network_inverse(Vector& psi, const GivensNetwork& net) {
  check_dim(psi.size(), net);
  const int nq = network_qubits(net);
  for (const auto& g : net.gates) apply_site_gate(psi.data(), nq, net.d, g.p, g.kind, g.theta, true);
  if (net.flip_last) apply_flip(psi.data(), nq, net);
}

GivensNetwork max_entanglement_network(int n_qubits) {
  if (n_qubits < 2 || n_qubits % 2 != 0) throw PreconditionError("need an even number of qubits");
  const int half = n_qubits / 2;
  std::vector<NetworkGate> circuit;  // in application order
  for (int t = 1; t <= half; ++t) {
    circuit.push_back({half - 1, M_PI / 4, GateKind::givens});
    for (int q = half; q < n_qubits - t; ++q) circuit.push_back({q, 0.0, GateKind::fswap});
    for (int q = half - 2; q >= t - 1; --q) circuit.push_back({q, 0.0, GateKind::fswap});
  }
  GivensNetwork net;
  net.n = n_qubits;
  net.d = 2;
  net.gates.assign(circuit.rbegin(), circuit.rend());
  return net;
}

int RotationRegistry::add(const Matrix& u) {
  check_orthogonal(u);
  u_.push_back(u);
  return static_cast<int>(u_.size()) - 1;
}

void RotationRegistry::set(int j, const Matrix& u) {
  check_orthogonal(u);
  u_.at(j) = u;
  invalidate(j);
}

void RotationRegistry::merge(int j, int p, GateKind kind, double theta) {
  u_.at(j) = merge_local(u_[j], p, kind, theta);
  invalidate(j);
}

void RotationRegistry::invalidate(int j) {
  abs_cache_.erase(j);
  for (auto it = pair_cache_.begin(); it != pair_cache_.end();) {
    if (it->first.first == j || it->first.second == j)
      it = pair_cache_.erase(it);
    else
      ++it;
  }
}

const GivensNetwork& RotationRegistry::pair_network(int i, int j) {
  auto key = std::make_pair(i, j);
  auto it = pair_cache_.find(key);
  if (it == pair_cache_.end())
    it = pair_cache_.emplace(key, givens_decompose(u_.at(i).transpose() * u_.at(j))).first;
  return it->second;
}

const GivensNetwork& RotationRegistry::network(int j) {
  auto it = abs_cache_.find(j);
  if (it == abs_cache_.end()) it = abs_cache_.emplace(j, givens_decompose(u_.at(j))).first;
  return it->second;
}

}  // namespace tnqe
