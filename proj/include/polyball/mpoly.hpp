#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "polyball/domain.hpp"

namespace polyball {

/// Exponent vector over the flat variables of a BlockStructure.
using Exponent = std::vector<std::uint16_t>;

/// Graded reverse lexicographic order; ties fall back on the canonical
/// variable order (z1_11 > z1_12 > ...).
struct GrevlexLess {
  bool operator()(const Exponent& a, const Exponent& b) const;
};

int total_degree(const Exponent& e);

/// Per-block degree bounds t_r used by the reverse operation.
using DegreeVector = std::vector<int>;

/// Sparse polynomial in the d variables of a polyball, complex coefficients.
///
/// Terms are kept in ascending grevlex order; coefficients with modulus below
/// kDropTol are removed on normalization.
class MPoly {
 public:
  static constexpr double kDropTol = 1e-14;
  using TermMap = std::map<Exponent, cplx, GrevlexLess>;

  explicit MPoly(BlockStructure structure);

  static MPoly constant(const BlockStructure& s, cplx c);
  static MPoly variable(const BlockStructure& s, int v, cplx c = 1.0);
  static MPoly monomial(const BlockStructure& s, Exponent e, cplx c = 1.0);

  const BlockStructure& structure() const { return structure_; }
  const TermMap& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }

  cplx coeff(const Exponent& e) const;
  /// Adds c to the coefficient of e (no normalization).
  void add_term(const Exponent& e, cplx c);
  void set_term(const Exponent& e, cplx c);
  MPoly& normalize(double drop_tol = kDropTol);

  /// Block-r degree; nullopt stands for -infinity (zero polynomial).
  std::optional<int> block_degree(int r) const;
  /// Smallest block-r degree over the terms; nullopt for zero.
  std::optional<int> min_block_degree(int r) const;
  std::optional<int> total_degree() const;
  /// Natural degree vector; throws for the zero polynomial.
  DegreeVector degrees() const;

  /// Leading term in grevlex; throws for zero.
  std::pair<Exponent, cplx> leading_term() const;
  cplx constant_term() const { return coeff(Exponent(static_cast<std::size_t>(structure_.d()), 0)); }

  double coeff_norm() const;
  double max_abs_coeff() const;

  MPoly operator+(const MPoly& o) const;
  MPoly operator-(const MPoly& o) const;
  MPoly operator*(const MPoly& o) const;
  MPoly operator*(cplx c) const;
  MPoly operator-() const { return *this * cplx(-1.0); }
  MPoly pow(int e) const;
  /// Coefficient-wise complex conjugate.
  MPoly conj() const;

  /// Max coefficient difference, 0 for identical support and values.
  double distance(const MPoly& o) const;

 private:
  void require_same(const MPoly& o) const;
  BlockStructure structure_;
  TermMap terms_;
};

/// rows x cols grid of polynomials sharing one structure.
class MatPoly {
 public:
  MatPoly(BlockStructure structure, int rows, int cols);
  static MatPoly scalar(const MPoly& p);
  static MatPoly identity(const BlockStructure& s, int n);

  const BlockStructure& structure() const { return structure_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const MPoly& operator()(int i, int j) const;
  MPoly& operator()(int i, int j);

  std::optional<int> total_degree() const;
  /// Coefficient matrix of z^e.
  CMatrix coefficient(const Exponent& e) const;

 private:
  BlockStructure structure_;
  int rows_, cols_;
  std::vector<MPoly> entries_;
};

cplx eval_point(const MPoly& p, const MatrixPoint& z);
CMatrix eval_tuple(const MPoly& p, const CommutingTuple& t);
CMatrix eval_point(const MatPoly& p, const MatrixPoint& z);
/// Block matrix [P_ab(T)] of side rows*N x cols*N.
CMatrix eval_tuple(const MatPoly& p, const CommutingTuple& t);

/// det Z^(r) by Leibniz expansion; r is zero-based.
MPoly det_poly(const BlockStructure& s, int r);
/// (-1)^(i+j) times the minor of Z^(r) without row i and column j (zero-based),
/// so that det Z^(r) * (Z^(r)^{-1})^T has this polynomial at (i, j).
MPoly cofactor_poly(const BlockStructure& s, int r, int i, int j);

/// prod_r (det Z^(r))^{t_r} * conj(p(Z^{*-1})).
///
/// Terms of block degree above t_r are handled by clearing det factors after
/// substitution, so any t with a polynomial result is accepted. Throws
/// InvalidArgument when t is below the reverse degree of p.
MPoly reverse(const MPoly& p, const DegreeVector& t);
/// Reverse at the natural degrees of p (0 for the zero polynomial).
MPoly reverse(const MPoly& p);

struct ReducedReverse {
  DegreeVector degrees;  // smallest t with a polynomial reverse
  MPoly poly;
};
/// Reverse at the smallest admissible degree vector; coincides with the
/// natural-degree reverse when every l_r = 1.
ReducedReverse reduced_reverse(const MPoly& p);

struct DivisionResult {
  bool divisible = false;
  MPoly quotient;
  MPoly remainder;
  double residual = 0.0;  // ||f - g q|| / max(||f||, tiny)
};
/// Multivariate division by g in grevlex; divisible when the relative
/// coefficient residual is at most tol.
DivisionResult exact_divide(const MPoly& f, const MPoly& g, double tol = 1e-9);

struct SelfReversiveResult {
  bool holds = false;
  std::optional<cplx> gamma;
  double residual = 0.0;  // ||reverse(v) - gamma v|| / ||v||
};
SelfReversiveResult is_almost_self_reversive(const MPoly& v, const DegreeVector& t,
                                             double tol = 1e-9);

struct DetPowerFactorization {
  std::vector<int> m;
  MPoly core;
};
/// Strips the largest power of each det Z^(r) dividing p. Throws for p = 0.
DetPowerFactorization factor_det_powers(const MPoly& p, double tol = 1e-9);

/// Product of (det Z^(r))^{m_r}.
MPoly det_power_product(const BlockStructure& s, const std::vector<int>& m);

}  // namespace polyball
