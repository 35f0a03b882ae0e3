#pragma once

#include <random>

#include "polyball/analysis.hpp"

namespace polyball::testing {

inline MPoly random_poly(const BlockStructure& s, int max_degree, int terms, Rng& rng) {
  std::normal_distribution<double> g;
  MPoly p(s);
  for (int t = 0; t < terms; ++t) {
    Exponent e(static_cast<std::size_t>(s.d()), 0);
    const int deg = static_cast<int>(rng() % static_cast<std::uint64_t>(max_degree + 1));
    for (int k = 0; k < deg; ++k) e[rng() % static_cast<std::uint64_t>(s.d())]++;
    p.add_term(e, cplx(g(rng), g(rng)));
  }
  p.normalize();
  if (p.is_zero()) p = MPoly::constant(s, 1.0);
  return p;
}

/// 1 + small terms with coefficient l1 norm below `budget` < 1: no zeros on the
/// closed polyball because every |z_ij| <= 1 there.
inline MPoly random_strongly_stable(const BlockStructure& s, int max_degree, int terms, double budget, Rng& rng) {
  MPoly q = random_poly(s, max_degree, terms, rng);
  MPoly tail(s);
  for (const auto& [e, c] : q.terms())
    if (total_degree(e) > 0) tail.add_term(e, c);
  tail.normalize();
  MPoly p = MPoly::constant(s, 1.0);
  double l1 = 0.0;
  for (const auto& [e, c] : tail.terms()) l1 += std::abs(c);
  if (l1 > 0.0) p = p + tail * (budget / l1);
  return p;
}

/// prod det(Z_r)^{t_r} conj(p(Z^{*-1})) evaluated directly.
inline cplx reverse_oracle(const MPoly& p, const DegreeVector& t, const MatrixPoint& z) {
  const BlockStructure& s = p.structure();
  std::vector<CMatrix> inv;
  cplx dets = 1.0;
  for (int r = 0; r < s.k(); ++r) {
    inv.push_back(z.block(r).adjoint().inverse());
    dets *= std::pow(z.block(r).determinant(), t[static_cast<std::size_t>(r)]);
  }
  return dets * std::conj(eval_point(p, MatrixPoint(s, inv)));
}

/// Kronecker product by explicit index arithmetic.
inline CMatrix kron_oracle(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j)
      out(i, j) = a(i / b.rows(), j / b.cols()) * b(i % b.rows(), j % b.cols());
  return out;
}

inline MPoly bidisk_p(double c) {
  const BlockStructure s({1, 1});
  return MPoly::constant(s, c) - MPoly::variable(s, 0) - MPoly::variable(s, 1);
}

/// Permutation colligation with transfer function z1 z2.
inline Colligation z1z2_colligation() {
  CMatrix A = CMatrix::Zero(2, 2), B = CMatrix::Zero(2, 1), C = CMatrix::Zero(1, 2), D = CMatrix::Zero(1, 1);
  A(0, 1) = 1.0;
  B(1, 0) = 1.0;
  C(0, 0) = 1.0;
  return Colligation(BlockStructure({1, 1}), {1, 1}, 1, A, B, C, D);
}

inline double max_abs_diff(const CMatrix& a, const CMatrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace polyball::testing
