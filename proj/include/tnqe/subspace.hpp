#pragma once

#include <array>
#include <optional>
#include <vector>

#include "tnqe/common.hpp"
#include "tnqe/hamiltonian.hpp"
#include "tnqe/mps.hpp"
#include "tnqe/rotations.hpp"

namespace tnqe {

enum class BasisKind { two_site, whole };

// Orthonormal expansion of one reference around bond (p, p+1). A "whole"
// basis holds the reference itself as a single element.
struct OneHotBasis {
  int ref = 0;
  int p = 0;
  BasisKind kind = BasisKind::two_site;
  int d = 4;
  int dl = 1;
  int dr = 1;
  bool symmetric = true;
  std::vector<Charge> left;
  std::vector<Charge> right;
  std::vector<std::array<int, 4>> tuples;  // (l, k1, k2, r), lexicographic
  Vector t;                                // coefficients of the current tensor

  int size() const { return kind == BasisKind::whole ? 1 : static_cast<int>(tuples.size()); }
};

OneHotBasis one_hot_decompose(const Mps& mps, int p, int ref = 0);
OneHotBasis whole_basis(int ref);

// Coefficients of an arbitrary two-site tensor on the basis tuples.
Vector coefficients_of(const OneHotBasis& basis, const TwoSiteTensor& t);
TwoSiteTensor tensor_from_coefficients(const OneHotBasis& basis, const Vector& c);

// Full Fock-space vectors of the basis elements in the reference's own
// orbital frame (columns).
Matrix one_hot_statevectors(const Mps& mps, const OneHotBasis& basis);

struct NoiseModel {
  double delta_h = 0.0;
  double delta_s = 0.0;
  std::uint64_t seed = 0;
  bool enabled() const { return delta_h > 0.0 || delta_s > 0.0; }
};

struct SubspacePencil {
  Matrix h;
  Matrix s;
  std::vector<int> block_ref;
  std::vector<int> block_offset;
  std::vector<int> block_size;
  std::vector<char> retained;
  std::uint64_t qpu_calls = 0;
  NoiseModel noise;
  std::uint64_t stream = 0;

  int dim() const { return static_cast<int>(h.rows()); }
  int n_blocks() const { return static_cast<int>(block_ref.size()); }
  int retained_count() const;
};

struct PencilBlock {
  const Mps* mps = nullptr;
  const OneHotBasis* basis = nullptr;
  const GivensNetwork* network = nullptr;  // rotation from the reference frame; null = identity
};

// Element (a m, b n) = <rotated basis vector a m | H or 1 | rotated basis vector b n>.
SubspacePencil assemble_pencil(const std::vector<PencilBlock>& blocks, const SparseHamiltonian& h,
                               const NoiseModel& noise, std::uint64_t stream = 0, int jobs = 1);
SubspacePencil assemble_pencil(const std::vector<Mps>& refs, const std::vector<OneHotBasis>& bases,
                               RotationRegistry& registry, const SparseHamiltonian& h,
                               const NoiseModel& noise, std::uint64_t stream = 0, int jobs = 1);

// Off-diagonal-block element evaluations for a block layout (H and S both counted).
std::uint64_t qpu_call_count(const std::vector<int>& block_sizes);

// Conjugate both matrices by a block-diagonal transform: X -> T X T^T.
SubspacePencil transform_pencil(const SubspacePencil& p, const std::vector<Matrix>& block_maps);

double projection_norm(const Matrix& s_block, const Vector& s_col);
void discard_columns(SubspacePencil& pencil, double lin_dep_tol = 1e-3, double cond_max = 1e8);
double retained_condition_number(const SubspacePencil& pencil);

enum class GeeMode { projection, inversion };

struct GeeSolution {
  Vector energies;  // ascending
  Matrix c;         // columns over the full pencil dimension (zeros on discarded columns)
  double kappa1 = 0.0;
  GeeMode mode = GeeMode::projection;
  int rank = 0;
};

GeeSolution solve_gee(const SubspacePencil& pencil, double eps_sv = 1e-10,
                      GeeMode mode = GeeMode::projection);
// Dense pair version used for small reduced problems.
GeeSolution solve_gee(const Matrix& h, const Matrix& s, double eps_sv = 1e-10,
                      GeeMode mode = GeeMode::projection);

// Normalized slice of the ground-state column belonging to a block, or
// nullopt when the slice vanishes.
std::optional<Vector> update_two_site(const SubspacePencil& pencil, int block,
                                      const GeeSolution& sol);

void write_pencil(const SubspacePencil& pencil, const std::string& path);

}  // namespace tnqe
