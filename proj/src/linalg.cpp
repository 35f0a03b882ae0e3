#include "polyball/linalg.hpp"

#include <cmath>
#include <limits>

namespace polyball {

double spectral_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

double condition_number(const CMatrix& m) {
  if (m.size() == 0) return 1.0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / smin;
}

double unitarity_defect(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  CMatrix g = m.adjoint() * m;
  g -= CMatrix::Identity(g.rows(), g.cols());
  return spectral_norm(g);
}

CMatrix project_psd(const CMatrix& m) {
  if (m.size() == 0) return m;
  CMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  RVector lam = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CMatrix ginibre(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = 1.0 / std::sqrt(2.0);
  CMatrix g(rows, cols);
  // Fill column-major explicitly so the draw order is fixed.
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(i, j) = cplx(re * scale, im * scale);
    }
  return g;
}

CMatrix haar_unitary(Eigen::Index n, Rng& rng) {
  if (n == 0) return CMatrix(0, 0);
  CMatrix g = ginibre(n, n, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ() * CMatrix::Identity(n, n);
  CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < n; ++i) {
    const cplx d = r(i, i);
    const double a = std::abs(d);
    const cplx phase = a > 0.0 ? d / a : cplx(1.0, 0.0);
    q.col(i) *= phase;
  }
  return q;
}

CMatrix orthogonal_complement(const CMatrix& basis, Eigen::Index ambient) {
  const Eigen::Index rank = basis.cols();
  if (rank == 0) return CMatrix::Identity(ambient, ambient);
  if (rank >= ambient) return CMatrix(ambient, 0);
  Eigen::ColPivHouseholderQR<CMatrix> qr(basis);
  CMatrix q = qr.householderQ() * CMatrix::Identity(ambient, ambient);
  return q.rightCols(ambient - rank);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace polyball
