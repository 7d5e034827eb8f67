#include "tnqe/dequantize.hpp"

#include <cmath>
#include <thread>

namespace tnqe {

MpsSampler::MpsSampler(const Mps& mps) : mps_(mps) {
  canonicalize(mps_, 0);
  normalize(mps_);
}

SampledBitstring MpsSampler::sample(CounterRng& rng) const {
  const int n = mps_.n_sites();
  const int d = mps_.d;
  SampledBitstring out;
  out.k.resize(n);
  Eigen::RowVectorXd env = Eigen::RowVectorXd::Ones(1);
  std::vector<Eigen::RowVectorXd> w(d);
  std::vector<double> p(d);
  for (int i = 0; i < n; ++i) {
    const auto& a = mps_.sites[i];
    double total = 0.0;
    for (int k = 0; k < d; ++k) {
      w[k] = Eigen::RowVectorXd::Zero(a.dr);
      for (int l = 0; l < a.dl; ++l) {
        if (env[l] == 0.0) continue;
        for (int r = 0; r < a.dr; ++r) w[k][r] += env[l] * a.at(l, k, r);
      }
      p[k] = w[k].squaredNorm();
      total += p[k];
    }
    double u = rng.uniform() * total;
    int pick = d - 1;
    for (int k = 0; k < d; ++k) {
      if (p[k] <= 0.0) continue;
      if (u < p[k]) {
        pick = k;
        break;
      }
      u -= p[k];
    }
    while (p[pick] <= 0.0 && pick > 0) --pick;
    out.k[i] = pick;
    env = w[pick];
  }
  out.amplitude = env[0];
  out.probability = out.amplitude * out.amplitude;
  out.bits = bits_of(out.k, d);
  return out;
}

SampledBitstring sample_bitstring(const Mps& mps, CounterRng& rng) { return MpsSampler(mps).sample(rng); }

std::vector<int> bits_of(const std::vector<int>& k, int d) {
  if (d == 2) return k;
  std::vector<int> b;
  b.reserve(2 * k.size());
  for (int v : k) {
    b.push_back((v >> 1) & 1);
    b.push_back(v & 1);
  }
  return b;
}

std::vector<int> local_of(const std::vector<int>& bits, int d) {
  if (d == 2) return bits;
  std::vector<int> k(bits.size() / 2);
  for (std::size_t i = 0; i < k.size(); ++i) k[i] = 2 * bits[2 * i] + bits[2 * i + 1];
  return k;
}

namespace {

void qubit_fswap(std::vector<int>& b, int q, int& phase) {
  if (b[q] && b[q + 1]) phase = -phase;
  std::swap(b[q], b[q + 1]);
}

void site_fswap(std::vector<int>& b, int d, int p, int& phase) {
  if (d == 2) {
    qubit_fswap(b, p, phase);
    return;
  }
  const int q = 2 * p;
  qubit_fswap(b, q + 1, phase);
  qubit_fswap(b, q, phase);
  qubit_fswap(b, q + 2, phase);
  qubit_fswap(b, q + 1, phase);
}

}  // namespace

Propagated fswap_propagate(const std::vector<int>& bits, const GivensNetwork& net, bool inverse) {
  if (!net.swaps_only()) throw UnsupportedError("sampled propagation needs a swaps-only network");
  const int nq = net.d == 4 ? 2 * net.n : net.n;
  if (static_cast<int>(bits.size()) != nq) throw PreconditionError("bitstring length does not match the network");
  Propagated out{bits, 1};
  if (inverse) {
    for (const auto& g : net.gates) site_fswap(out.bits, net.d, g.p, out.phase);
  } else {
    for (auto it = net.gates.rbegin(); it != net.gates.rend(); ++it) site_fswap(out.bits, net.d, it->p, out.phase);
  }
  return out;
}

namespace {

OverlapEstimate estimate_with(const MpsSampler& si, const Mps& mps_j, const GivensNetwork& net, int n,
                              CounterRng& rng) {
  const int d = mps_j.d;
  double sum = 0.0, sum2 = 0.0;
  for (int s = 0; s < n; ++s) {
    const SampledBitstring x = si.sample(rng);
    const Propagated y = fswap_propagate(x.bits, net, true);
    const double aj = amplitude(mps_j, local_of(y.bits, d));
    const double v = y.phase * aj / x.amplitude;
    sum += v;
    sum2 += v * v;
  }
  OverlapEstimate e;
  e.samples = n;
  e.estimate = sum / n;
  const double var = n > 1 ? std::max(0.0, (sum2 - n * e.estimate * e.estimate) / (n - 1)) : 0.0;
  e.stderr_ = std::sqrt(var / n);
  return e;
}

void check_pair(const Mps& a, const Mps& b, const GivensNetwork& net) {
  if (a.n_sites() != b.n_sites() || a.d != b.d) throw PreconditionError("states have different shapes");
  if (!net.swaps_only()) throw UnsupportedError("overlap sampling needs a swaps-only network");
  if (net.n != a.n_sites() || net.d != a.d) throw PreconditionError("network does not match the states");
}

}  // namespace

OverlapEstimate overlap_sampled(const Mps& mps_i, const Mps& mps_j, const GivensNetwork& net, int n_samples,
                                CounterRng& rng) {
  check_pair(mps_i, mps_j, net);
  if (n_samples < 1) throw PreconditionError("need at least one sample");
  const MpsSampler si(mps_i);
  Mps j = mps_j;
  normalize(j);
  return estimate_with(si, j, net, n_samples, rng);
}

std::vector<OverlapEstimate> overlap_sampled_batches(const Mps& mps_i, const Mps& mps_j, const GivensNetwork& net,
                                                     int n_batches, int n_per_batch, std::uint64_t seed, int jobs) {
  check_pair(mps_i, mps_j, net);
  if (n_per_batch < 1 || n_batches < 1) throw PreconditionError("need at least one batch and sample");
  const MpsSampler si(mps_i);
  Mps j = mps_j;
  normalize(j);
  std::vector<OverlapEstimate> out(n_batches);
  auto work = [&](int t, int stride) {
    for (int b = t; b < n_batches; b += stride) {
      CounterRng rng(CounterRng::hash(seed, static_cast<std::uint64_t>(b)));
      out[b] = estimate_with(si, j, net, n_per_batch, rng);
    }
  };
  const int nt = std::max(1, std::min(jobs, n_batches));
  if (nt == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(work, t, nt);
    for (auto& th : pool) th.join();
  }
  return out;
}

int double_sampling_hits(const Mps& a, const Mps& b, int n_samples, CounterRng& rng) {
  const MpsSampler sa(a), sb(b);
  int hits = 0;
  for (int s = 0; s < n_samples; ++s)
    if (sa.sample(rng).k == sb.sample(rng).k) ++hits;
  return hits;
}

}  // namespace tnqe
