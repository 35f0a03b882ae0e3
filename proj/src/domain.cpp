#include "polyball/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace polyball {

BlockStructure::BlockStructure(std::vector<int> ell) : ell_(std::move(ell)) {
  if (ell_.empty()) throw InvalidArgument("block structure needs k >= 1 blocks");
  for (int l : ell_)
    if (l < 1) throw InvalidArgument("block sizes must be >= 1");
  int off = 0;
  for (int r = 0; r < k(); ++r) {
    offset_.push_back(off);
    const int l = ell_[static_cast<std::size_t>(r)];
    for (int i = 0; i < l; ++i)
      for (int j = 0; j < l; ++j) entries_.push_back({r, i, j});
    off += l * l;
  }
  d_ = off;
}

int BlockStructure::flat_index(int r, int i, int j) const {
  if (r < 0 || r >= k()) throw IndexOutOfRange("block index out of range");
  const int l = ell(r);
  if (i < 0 || i >= l || j < 0 || j >= l) throw IndexOutOfRange("entry index out of range");
  return block_offset(r) + i * l + j;
}

BlockStructure::Entry BlockStructure::entry(int v) const {
  if (v < 0 || v >= d_) throw IndexOutOfRange("variable index out of range");
  return entries_[static_cast<std::size_t>(v)];
}

std::string BlockStructure::variable_name(int v) const {
  const Entry e = entry(v);
  return "z" + std::to_string(e.r + 1) + "_" + std::to_string(e.i + 1) + std::to_string(e.j + 1);
}

int BlockStructure::variable_index(const std::string& name) const {
  for (int v = 0; v < d_; ++v)
    if (variable_name(v) == name) return v;
  return -1;
}

const char* to_string(PointClass c) {
  switch (c) {
    case PointClass::Interior: return "Interior";
    case PointClass::Shilov: return "Shilov";
    case PointClass::BoundaryOther: return "BoundaryOther";
    case PointClass::Exterior: return "Exterior";
  }
  return "?";
}

MatrixPoint::MatrixPoint(BlockStructure structure, std::vector<CMatrix> blocks)
    : structure_(std::move(structure)), blocks_(std::move(blocks)) {
  if (static_cast<int>(blocks_.size()) != structure_.k())
    throw StructureMismatch("point has wrong number of blocks");
  for (int r = 0; r < structure_.k(); ++r) {
    const auto& b = blocks_[static_cast<std::size_t>(r)];
    if (b.rows() != structure_.ell(r) || b.cols() != structure_.ell(r))
      throw StructureMismatch("point block " + std::to_string(r + 1) + " has wrong shape");
  }
}

cplx MatrixPoint::coord(int v) const {
  const auto e = structure_.entry(v);
  return blocks_[static_cast<std::size_t>(e.r)](e.i, e.j);
}

CVector MatrixPoint::coords() const {
  CVector z(structure_.d());
  for (int v = 0; v < structure_.d(); ++v) z(v) = coord(v);
  return z;
}

MatrixPoint MatrixPoint::from_coords(const BlockStructure& s, const CVector& z) {
  if (z.size() != s.d()) throw StructureMismatch("coordinate vector has wrong length");
  std::vector<CMatrix> blocks;
  for (int r = 0; r < s.k(); ++r) blocks.emplace_back(s.ell(r), s.ell(r));
  for (int v = 0; v < s.d(); ++v) {
    const auto e = s.entry(v);
    blocks[static_cast<std::size_t>(e.r)](e.i, e.j) = z(v);
  }
  return MatrixPoint(s, std::move(blocks));
}

double MatrixPoint::max_block_norm() const {
  double m = 0.0;
  for (const auto& b : blocks_) m = std::max(m, spectral_norm(b));
  return m;
}

PointClass MatrixPoint::classify(double tol) const {
  bool shilov = true;
  for (const auto& b : blocks_)
    if (unitarity_defect(b) > tol) shilov = false;
  if (shilov) return PointClass::Shilov;
  const double m = max_block_norm();
  if (m < 1.0) return PointClass::Interior;
  if (m <= 1.0 + tol) return PointClass::BoundaryOther;
  return PointClass::Exterior;
}

MatrixPoint MatrixPoint::scaled(cplx a) const {
  std::vector<CMatrix> b = blocks_;
  for (auto& m : b) m *= a;
  return MatrixPoint(structure_, std::move(b));
}

MatrixPoint MatrixPoint::operator+(const MatrixPoint& o) const {
  if (o.structure_ != structure_) throw StructureMismatch("adding points of different structure");
  std::vector<CMatrix> b = blocks_;
  for (std::size_t r = 0; r < b.size(); ++r) b[r] += o.blocks_[r];
  return MatrixPoint(structure_, std::move(b));
}

CommutingTuple::CommutingTuple(BlockStructure structure, int N, std::vector<CMatrix> mats)
    : structure_(std::move(structure)), N_(N), mats_(std::move(mats)) {
  if (N_ < 1) throw InvalidArgument("tuple dimension N must be >= 1");
  if (static_cast<int>(mats_.size()) != structure_.d())
    throw StructureMismatch("tuple needs one matrix per variable");
  for (const auto& m : mats_)
    if (m.rows() != N_ || m.cols() != N_) throw StructureMismatch("tuple matrix has wrong shape");
  std::vector<double> norms;
  for (const auto& m : mats_) norms.push_back(spectral_norm(m));
  for (std::size_t a = 0; a < mats_.size(); ++a)
    for (std::size_t b = a + 1; b < mats_.size(); ++b) {
      const double c = spectral_norm(mats_[a] * mats_[b] - mats_[b] * mats_[a]);
      if (c > kCommutatorTol * std::max(1.0, norms[a] * norms[b]))
        throw InvalidArgument("tuple members " + structure_.variable_name(static_cast<int>(a)) +
                              " and " + structure_.variable_name(static_cast<int>(b)) +
                              " do not commute");
    }
  if (max_block_norm() >= 1.0) throw InvalidArgument("tuple operator block is not a strict contraction");
}

CMatrix CommutingTuple::operator_block(int r) const {
  const int l = structure_.ell(r);
  CMatrix t(l * N_, l * N_);
  for (int i = 0; i < l; ++i)
    for (int j = 0; j < l; ++j) t.block(i * N_, j * N_, N_, N_) = mat(structure_.flat_index(r, i, j));
  return t;
}

double CommutingTuple::max_block_norm() const {
  double m = 0.0;
  for (int r = 0; r < structure_.k(); ++r) m = std::max(m, spectral_norm(operator_block(r)));
  return m;
}

double CommutingTuple::max_commutator() const {
  double m = 0.0;
  for (std::size_t a = 0; a < mats_.size(); ++a)
    for (std::size_t b = a + 1; b < mats_.size(); ++b)
      m = std::max(m, spectral_norm(mats_[a] * mats_[b] - mats_[b] * mats_[a]));
  return m;
}

MatrixPoint CommutingTuple::as_point() const {
  if (N_ != 1) throw InvalidArgument("only N = 1 tuples are points");
  CVector z(structure_.d());
  for (int v = 0; v < structure_.d(); ++v) z(v) = mats_[static_cast<std::size_t>(v)](0, 0);
  return MatrixPoint::from_coords(structure_, z);
}

int inflated_side(const BlockStructure& s, const std::vector<int>& n) {
  if (static_cast<int>(n.size()) != s.k()) throw StructureMismatch("multiplicity vector has wrong length");
  int side = 0;
  for (int r = 0; r < s.k(); ++r) {
    if (n[static_cast<std::size_t>(r)] < 0) throw InvalidArgument("multiplicities must be >= 0");
    side += s.ell(r) * n[static_cast<std::size_t>(r)];
  }
  return side;
}

CMatrix inflate(const MatrixPoint& z, const std::vector<int>& n) {
  const auto& s = z.structure();
  const int side = inflated_side(s, n);
  CMatrix out = CMatrix::Zero(side, side);
  int off = 0;
  for (int r = 0; r < s.k(); ++r) {
    const int nr = n[static_cast<std::size_t>(r)];
    if (nr == 0) continue;
    const int l = s.ell(r);
    out.block(off, off, l * nr, l * nr) = kron(z.block(r), CMatrix::Identity(nr, nr));
    off += l * nr;
  }
  return out;
}

CMatrix inflate(const CommutingTuple& t, const std::vector<int>& n) {
  const auto& s = t.structure();
  const int side = inflated_side(s, n);
  const int N = t.N();
  CMatrix out = CMatrix::Zero(side * N, side * N);
  int off = 0;
  for (int r = 0; r < s.k(); ++r) {
    const int nr = n[static_cast<std::size_t>(r)];
    const int l = s.ell(r);
    for (int i = 0; i < l; ++i)
      for (int j = 0; j < l; ++j)
        for (int m = 0; m < nr; ++m) {
          const int row = off + i * nr + m;
          const int col = off + j * nr + m;
          out.block(row * N, col * N, N, N) = t.mat(s.flat_index(r, i, j));
        }
    off += l * nr;
  }
  return out;
}

MatrixPoint sample_shilov(const BlockStructure& s, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<CMatrix> blocks;
  for (int r = 0; r < s.k(); ++r) blocks.push_back(haar_unitary(s.ell(r), rng));
  return MatrixPoint(s, std::move(blocks));
}

MatrixPoint sample_interior(const BlockStructure& s, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> radius(0.0, 1.0 - 1e-3);
  std::vector<CMatrix> blocks;
  for (int r = 0; r < s.k(); ++r) {
    CMatrix g = ginibre(s.ell(r), s.ell(r), rng);
    double rho = radius(rng);
    while (rho <= 0.0) rho = radius(rng);
    blocks.push_back(g * (rho / spectral_norm(g)));
  }
  return MatrixPoint(s, std::move(blocks));
}

namespace {

cplx random_in_disk(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double rad = std::sqrt(u(rng));
  const double ang = 2.0 * M_PI * u(rng);
  return std::polar(rad, ang);
}

std::vector<CMatrix> diagonalizable_family(const BlockStructure& s, int N, Rng& rng) {
  for (int attempt = 0; attempt < 10; ++attempt) {
    CMatrix S = ginibre(N, N, rng);
    std::vector<cplx> diag(static_cast<std::size_t>(s.d() * N));
    for (auto& x : diag) x = random_in_disk(rng);
    if (condition_number(S) > 1e12) continue;
    const CMatrix Sinv = S.inverse();
    std::vector<CMatrix> mats;
    for (int v = 0; v < s.d(); ++v) {
      CVector dv(N);
      for (int a = 0; a < N; ++a) dv(a) = diag[static_cast<std::size_t>(v * N + a)];
      mats.push_back(S * dv.asDiagonal() * Sinv);
    }
    return mats;
  }
  throw NumericalFailure("could not draw a well-conditioned similarity after 10 attempts");
}

std::vector<CMatrix> single_generator_family(const BlockStructure& s, int N, Rng& rng) {
  std::bernoulli_distribution coin(0.6);
  std::normal_distribution<double> normal(0.0, 1.0);
  CMatrix J = CMatrix::Zero(N, N);
  // Diagonal part constant on Jordan chains so the nilpotent part is genuine.
  cplx lambda = random_in_disk(rng);
  for (int a = 0; a < N; ++a) {
    if (a > 0) {
      if (coin(rng)) {
        J(a - 1, a) = 1.0;
      } else {
        lambda = random_in_disk(rng);
      }
    }
    J(a, a) = lambda;
  }
  std::vector<CMatrix> powers{CMatrix::Identity(N, N)};
  for (int e = 1; e < N; ++e) powers.push_back(powers.back() * J);
  std::vector<CMatrix> mats;
  for (int v = 0; v < s.d(); ++v) {
    CMatrix t = CMatrix::Zero(N, N);
    for (int e = 0; e < N; ++e) {
      const double re = normal(rng);
      const double im = normal(rng);
      t += cplx(re, im) / static_cast<double>(e + 1) * powers[static_cast<std::size_t>(e)];
    }
    mats.push_back(t);
  }
  return mats;
}

}  // namespace

CommutingTuple sample_commuting_tuple(const BlockStructure& s, int N, TupleFamily family,
                                      std::uint64_t seed) {
  if (N < 1) throw InvalidArgument("tuple dimension N must be >= 1");
  Rng rng(seed);
  for (int attempt = 0; attempt < 10; ++attempt) {
    std::vector<CMatrix> mats = family == TupleFamily::Diagonalizable
                                    ? diagonalizable_family(s, N, rng)
                                    : single_generator_family(s, N, rng);
    double maxnorm = 0.0;
    for (int r = 0; r < s.k(); ++r) {
      const int l = s.ell(r);
      CMatrix t(l * N, l * N);
      for (int i = 0; i < l; ++i)
        for (int j = 0; j < l; ++j)
          t.block(i * N, j * N, N, N) = mats[static_cast<std::size_t>(s.flat_index(r, i, j))];
      maxnorm = std::max(maxnorm, spectral_norm(t));
    }
    if (maxnorm == 0.0) continue;
    const double scale = (1.0 - 1e-3) / maxnorm;
    for (auto& m : mats) m *= scale;
    try {
      return CommutingTuple(s, N, std::move(mats));
    } catch (const InvalidArgument&) {
      // ill-conditioned draw; commutators lost to rounding
    }
  }
  throw NumericalFailure("could not sample a valid commuting tuple after 10 attempts");
}

}  // namespace polyball
