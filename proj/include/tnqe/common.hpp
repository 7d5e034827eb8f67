#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace tnqe {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Error kinds. Callers that need to distinguish input problems from numerical
// trouble catch the specific type; everything derives from Error.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FormatError : Error {
  using Error::Error;
};
struct PreconditionError : Error {
  using Error::Error;
};
struct ResourceError : Error {
  using Error::Error;
};
struct StateError : Error {
  using Error::Error;
};
struct UnsupportedError : Error {
  using Error::Error;
};
struct NumericalError : Error {
  using Error::Error;
};
struct DegeneratePencilError : NumericalError {
  using NumericalError::NumericalError;
};

// (n_up, n_down) particle counts. Used both for global sectors and for
// per-bond charge labels.
struct Charge {
  int up = 0;
  int dn = 0;

  Charge operator+(const Charge& o) const { return {up + o.up, dn + o.dn}; }
  Charge operator-(const Charge& o) const { return {up - o.up, dn - o.dn}; }
  auto operator<=>(const Charge&) const = default;

  int particles() const { return up + dn; }
  int ms2() const { return up - dn; }
};

inline Charge sector_from(int n_electrons, int ms2) {
  if ((n_electrons + ms2) % 2 != 0 || std::abs(ms2) > n_electrons)
    throw PreconditionError("inconsistent electron count and spin");
  return {(n_electrons + ms2) / 2, (n_electrons - ms2) / 2};
}

// Counter-based generator (splitmix64 finalizer over a keyed counter). Every
// draw is a pure function of (key, counter), so streams can be split per
// element or per batch and replayed independently of evaluation order.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key = 0, std::uint64_t counter = 0)
      : key_(mix(key ^ 0x9e3779b97f4a7c15ULL)), ctr_(counter) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t hash(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0,
                            std::uint64_t d = 0) {
    std::uint64_t h = mix(a);
    h = mix(h ^ b);
    h = mix(h ^ c);
    return mix(h ^ d);
  }

  std::uint64_t next_u64() { return mix(key_ + 0x632be59bd9b4e019ULL * ++ctr_); }

  // Uniform in (0, 1).
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

 private:
  std::uint64_t key_;
  std::uint64_t ctr_;
};

// Standard normal keyed on a tuple; used for per-element noise draws.
inline double keyed_normal(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                           std::uint64_t c) {
  CounterRng r(CounterRng::hash(seed, a, b, c));
  return r.normal();
}

}  // namespace tnqe
