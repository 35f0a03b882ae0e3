#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "polyball/domain.hpp"
#include "polyball/mpoly.hpp"

namespace polyball {

class NotCompletelyPositive : public Error {
 public:
  using Error::Error;
};

class InvalidCertificate : public Error {
 public:
  using Error::Error;
};

/// Colligation [[A, B], [C, D]] with state space split as sum_r l_r n_r.
///
/// F(Z) = D + C Z_n (I - A Z_n)^{-1} B.
class Colligation {
 public:
  static constexpr double kUnitaryTol = 1e-9;

  Colligation(BlockStructure structure, std::vector<int> n, int s, CMatrix A, CMatrix B, CMatrix C,
              CMatrix D);
  static Colligation from_system(const BlockStructure& structure, std::vector<int> n, int s,
                                 const CMatrix& system);

  const BlockStructure& structure() const { return structure_; }
  const std::vector<int>& n() const { return n_; }
  int s() const { return s_; }
  int state_dim() const { return static_cast<int>(A_.rows()); }
  const CMatrix& A() const { return A_; }
  const CMatrix& B() const { return B_; }
  const CMatrix& C() const { return C_; }
  const CMatrix& D() const { return D_; }

  CMatrix system() const;
  double unitary_defect() const;
  bool is_unitary() const { return unitary_defect() <= kUnitaryTol; }
  /// det [[A, B], [C, D]].
  cplx lambda() const;

 private:
  BlockStructure structure_;
  std::vector<int> n_;
  int s_;
  CMatrix A_, B_, C_, D_;
};

Colligation random_unitary_colligation(const BlockStructure& s, const std::vector<int>& n, int out,
                                       std::uint64_t seed);

/// Throws NumericalFailure when cond(I - A Z_n) exceeds 1e12.
CMatrix eval_transfer(const Colligation& c, const MatrixPoint& z);
/// F(T) on the N-inflated state space; s N x s N.
CMatrix eval_transfer(const Colligation& c, const CommutingTuple& t);

struct ColligationReport {
  double unitary_defect = 0.0;
  bool unitary = false;
  int shilov_samples = 0;
  double max_inner_defect = 0.0;  // max ||F(U)^* F(U) - I||
  bool inner = false;
  int tuple_samples = 0;
  int tuples_skipped = 0;
  double max_tuple_norm = 0.0;  // max ||F(T)||_2
  bool schur_agler = false;
  bool pass() const { return unitary && inner && schur_agler; }
};

struct VerifyOptions {
  int shilov_samples = 100;
  int tuples = 300;
  int N_max = 6;
  std::uint64_t seed = 0;
  double inner_tol = 1e-8;
  double agler_slack = 1e-8;
};

/// Unitarity, boundary innerness, and the commuting-tuple contraction bound.
ColligationReport verify_colligation(const Colligation& c, const VerifyOptions& opt = {});

// --- Choi factorization ------------------------------------------------------

/// Block matrix [Phi(E_ij)]_{ij} of side a*b.
CMatrix choi_matrix(const std::function<CMatrix(const CMatrix&)>& phi, int a, int b);

/// Y in C^{a^2 b x b} with Phi(X) = Y^* (X kron I_{ab}) Y.
/// Throws NotCompletelyPositive when the Choi matrix is not Hermitian PSD.
CMatrix choi_factor(const CMatrix& choi, int a, int b);

/// Y^* (X kron I_{ab}) Y.
CMatrix apply_choi_factor(const CMatrix& Y, const CMatrix& X, int a, int b);

// --- Agler decomposition -----------------------------------------------------

/// All exponents of total degree <= deg in d variables, ascending grevlex.
std::vector<Exponent> monomials_up_to(int d, int deg);

/// C(n, k) as a 64-bit integer (0 when k < 0 or k > n).
long long binomial(int n, int k);

/// Polynomial Agler decomposition
///   P(W)^* P(Z) - Q(W)^* Q(Z) = sum_r G_r(W)^* ((I - W^(r)* Z^(r)) kron I_{n_r}) G_r(Z)
/// with G_r of degree <= g - 1, stored both as Gram blocks M_r and factors.
struct GramCertificate {
  BlockStructure structure;
  int s = 1;
  int g = 0;
  std::vector<Exponent> monomials;            // total degree <= g - 1
  std::vector<CMatrix> M;                     // per block, side l_r * |monomials| * s
  std::vector<int> n;                         // ranks of M_r
  std::vector<std::vector<CMatrix>> G;        // G[r][a] in C^{l_r n_r x s}
  double residual = 0.0;                      // max coefficient mismatch
  long iterations = 0;

  /// Builds M_r = Y_r^* Y_r from explicit coefficient matrices G[r][a].
  static GramCertificate from_factors(const BlockStructure& s, int out, int g,
                                      std::vector<std::vector<CMatrix>> G);

  /// Stacked col_r G_r(Z), (sum_r l_r n_r) x s.
  CMatrix eval(const MatrixPoint& z) const;
  /// l_r s C(g + d - 1, d).
  long long dimension_bound(int r) const;
};

struct GramOptions {
  double tol = 1e-7;
  long max_iters = 200000;
  double rank_tol = 1e-9;
  /// Gauss-Newton refinement of the Gram factors after projection.
  bool polish = true;
};

struct GramResult {
  bool feasible = false;
  std::optional<GramCertificate> certificate;
  double best_residual = 0.0;
  long iterations = 0;
  std::string message;
};

GramResult gram_feasibility(const MatPoly& P, const MatPoly& Q, int g, const GramOptions& opt = {});

/// Max coefficient mismatch of the decomposition encoded by cert.
double gram_coefficient_residual(const MatPoly& P, const MatPoly& Q, const GramCertificate& cert);
/// Sum of absolute coefficient mismatches.
double gram_coefficient_residual_l1(const MatPoly& P, const MatPoly& Q, const GramCertificate& cert);
/// Spectral norm of the decomposition mismatch at the point pair (Z, W).
double gram_point_residual(const MatPoly& P, const MatPoly& Q, const GramCertificate& cert,
                           const MatrixPoint& z, const MatrixPoint& w);

struct LurkingResult {
  Colligation colligation;
  double gram_defect = 0.0;      // max |X^*X - Y^*Y| relative
  double transfer_error = 0.0;   // max ||F(Z) - Q(Z) P(Z)^{-1}|| at fresh points
  int samples = 0;
};

/// Unitary extension of Z_n G(Z) h (+) P(Z) h  ->  G(Z) h (+) Q(Z) h.
/// Throws InvalidCertificate when the sampled Gram matrices disagree.
LurkingResult lurking_isometry(const MatPoly& P, const MatPoly& Q, const GramCertificate& cert,
                               std::uint64_t seed = 0);

struct BoundaryReport {
  int samples = 0;
  double max_defect = 0.0;  // max ||P(U)^*P(U) - Q(U)^*Q(U)||
  bool pass = false;
};
BoundaryReport boundary_gram_check(const MatPoly& P, const MatPoly& Q, int samples = 200,
                                   std::uint64_t seed = 0);

struct SynthesisResult {
  BoundaryReport boundary;
  GramResult gram;
  std::optional<LurkingResult> realization;
  std::string verdict;  // Success, BoundaryFail, Infeasible
  bool success() const { return realization.has_value(); }
};

/// boundary_gram_check -> gram_feasibility -> lurking_isometry.
SynthesisResult synthesize(const MatPoly& P, const MatPoly& Q, int g, const GramOptions& opt = {},
                           std::uint64_t seed = 0);

}  // namespace polyball
