#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polyball/linalg.hpp"

namespace polyball {

/// Shape (k; l_1..l_k) of a square-matrix polyball.
///
/// Scalar variables z^(r)_ij are flattened block by block, row-major inside
/// each block. This order is shared by exponent vectors, JSON, and the
/// Kronecker layouts of inflate().
class BlockStructure {
 public:
  BlockStructure() = default;
  explicit BlockStructure(std::vector<int> ell);

  int k() const { return static_cast<int>(ell_.size()); }
  int ell(int r) const { return ell_.at(static_cast<std::size_t>(r)); }
  const std::vector<int>& ells() const { return ell_; }
  /// Number of scalar variables, sum of l_r^2.
  int d() const { return d_; }

  /// Zero-based (r, i, j) to flat index.
  int flat_index(int r, int i, int j) const;
  struct Entry {
    int r, i, j;
  };
  Entry entry(int v) const;
  int block_offset(int r) const { return offset_.at(static_cast<std::size_t>(r)); }
  int block_of(int v) const { return entry(v).r; }

  /// "z{r}_{i}{j}" with 1-based indices.
  std::string variable_name(int v) const;
  /// Inverse of variable_name; -1 when the name is not a variable here.
  int variable_index(const std::string& name) const;

  bool operator==(const BlockStructure& o) const { return ell_ == o.ell_; }
  bool operator!=(const BlockStructure& o) const { return !(*this == o); }

 private:
  std::vector<int> ell_;
  std::vector<int> offset_;
  std::vector<Entry> entries_;
  int d_ = 0;
};

enum class PointClass { Interior, Shilov, BoundaryOther, Exterior };

const char* to_string(PointClass c);

/// A point Z = (Z^(1), ..., Z^(k)) with Z^(r) of shape l_r x l_r.
class MatrixPoint {
 public:
  MatrixPoint(BlockStructure structure, std::vector<CMatrix> blocks);

  const BlockStructure& structure() const { return structure_; }
  const CMatrix& block(int r) const { return blocks_.at(static_cast<std::size_t>(r)); }
  const std::vector<CMatrix>& blocks() const { return blocks_; }

  /// Value of the flat scalar variable v.
  cplx coord(int v) const;
  /// All d scalar coordinates in canonical order.
  CVector coords() const;
  static MatrixPoint from_coords(const BlockStructure& s, const CVector& z);

  double max_block_norm() const;
  PointClass classify(double tol = 1e-10) const;

  MatrixPoint scaled(cplx a) const;
  MatrixPoint operator+(const MatrixPoint& o) const;

 private:
  BlockStructure structure_;
  std::vector<CMatrix> blocks_;
};

/// One N x N matrix per scalar variable, pairwise commuting, with every
/// operator block T^(r) = [T^(r)_ij] strictly contractive.
class CommutingTuple {
 public:
  static constexpr double kCommutatorTol = 1e-10;

  /// Validates shapes, commutation across all pairs, and contractivity.
  CommutingTuple(BlockStructure structure, int N, std::vector<CMatrix> mats);

  const BlockStructure& structure() const { return structure_; }
  int N() const { return N_; }
  const CMatrix& mat(int v) const { return mats_.at(static_cast<std::size_t>(v)); }
  const std::vector<CMatrix>& mats() const { return mats_; }

  /// The l_r N x l_r N operator matrix of block r.
  CMatrix operator_block(int r) const;
  double max_block_norm() const;
  double max_commutator() const;

  /// N = 1 tuples are ordinary points.
  MatrixPoint as_point() const;

 private:
  BlockStructure structure_;
  int N_;
  std::vector<CMatrix> mats_;
};

enum class TupleFamily { Diagonalizable, SingleGenerator };

/// Z_n = (+)_r (Z^(r) kron I_{n_r}); blocks with n_r = 0 are omitted.
CMatrix inflate(const MatrixPoint& z, const std::vector<int>& n);

/// Same layout with each scalar entry replaced by the N x N matrix T_v.
/// Side is N * sum_r l_r n_r.
CMatrix inflate(const CommutingTuple& t, const std::vector<int>& n);

int inflated_side(const BlockStructure& s, const std::vector<int>& n);

MatrixPoint sample_shilov(const BlockStructure& s, std::uint64_t seed);
MatrixPoint sample_interior(const BlockStructure& s, std::uint64_t seed);
CommutingTuple sample_commuting_tuple(const BlockStructure& s, int N, TupleFamily family,
                                      std::uint64_t seed);

}  // namespace polyball
