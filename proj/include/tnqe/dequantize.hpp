#pragma once

#include <vector>

#include "tnqe/common.hpp"
#include "tnqe/mps.hpp"
#include "tnqe/rotations.hpp"

namespace tnqe {

struct SampledBitstring {
  std::vector<int> k;     // local index per site
  std::vector<int> bits;  // qubit occupations (d=4 sites give two bits each)
  double amplitude = 0.0;
  double probability = 0.0;
};

// Holds a normalized copy with the canonical center on site 0 so that every
// conditional marginal is a local norm.
class MpsSampler {
 public:
  explicit MpsSampler(const Mps& mps);
  SampledBitstring sample(CounterRng& rng) const;
  const Mps& state() const { return mps_; }

 private:
  Mps mps_;
};

SampledBitstring sample_bitstring(const Mps& mps, CounterRng& rng);

std::vector<int> bits_of(const std::vector<int>& k, int d);
std::vector<int> local_of(const std::vector<int>& bits, int d);

struct Propagated {
  std::vector<int> bits;
  int phase = 1;
};

// Action of a swaps-only network on an occupation basis state (inverse=false
// gives N|x>, inverse=true gives N^T|x>).
Propagated fswap_propagate(const std::vector<int>& bits, const GivensNetwork& net, bool inverse = false);

struct OverlapEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
  int samples = 0;
};

// Estimates <phi_i| N |phi_j> by sampling x from |<x|phi_i>|^2.
OverlapEstimate overlap_sampled(const Mps& mps_i, const Mps& mps_j, const GivensNetwork& net,
                                int n_samples, CounterRng& rng);

// Independent batches with seeds derived from (seed, batch).
std::vector<OverlapEstimate> overlap_sampled_batches(const Mps& mps_i, const Mps& mps_j,
                                                     const GivensNetwork& net, int n_batches,
                                                     int n_per_batch, std::uint64_t seed,
                                                     int jobs = 1);

// Number of coincidences when x ~ |phi_a|^2 and y ~ |phi_b|^2 are drawn
// independently.
int double_sampling_hits(const Mps& a, const Mps& b, int n_samples, CounterRng& rng);

}  // namespace tnqe
