#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "polyball/mpoly.hpp"
#include "polyball/realization.hpp"

namespace polyball {

class NotDivisible : public Error {
 public:
  using Error::Error;
};

class SelfReversiveFail : public Error {
 public:
  using Error::Error;
};

/// det(I - K Z_n) as a polynomial; constant term 1.
///
/// Memoized cofactor expansion up to side 6, fraction-free elimination above.
MPoly det_pencil(const CMatrix& K, const BlockStructure& s, const std::vector<int>& n);

struct PqReport {
  int trials = 0;
  double max_deviation = 0.0;  // relative
  bool pass = false;
};

/// det [[I - A Z_n, B], [-C Z_n, D]] = lambda det(A^* - Z_n) at random points.
PqReport pq_identity_check(const Colligation& c, int trials = 100, std::uint64_t seed = 0,
                           double tol = 1e-8);

/// Evidence that prod det^{s_r} <-p / p is Schur-Agler: p v = det(I - K Z_n)
/// with K contractive and v almost self-reversive.
///
/// Reverse degrees are the minimal ones (see reduced_reverse), so
/// s_r = n_r - tau_r(p) - tau_r(v).
struct DetRepCertificate {
  BlockStructure structure;
  MPoly p;
  std::vector<int> n;
  CMatrix K;
  MPoly v;
  cplx gamma = 1.0;
  std::vector<int> s;
  DegreeVector p_degrees;
  DegreeVector v_degrees;
  double division_residual = 0.0;
  double self_reversive_residual = 0.0;
  double contractivity_margin = 0.0;  // 1 - ||K||_2

  DetRepCertificate();
};

/// prod det^{s_r} times the reduced reverse of p.
MPoly lifted_numerator(const DetRepCertificate& cert);
/// lifted_numerator / p at z.
cplx lifted_value(const DetRepCertificate& cert, const MatrixPoint& z);

/// Builds a certificate from a pencil matrix K. Throws NotDivisible,
/// SelfReversiveFail, or InvalidCertificate (negative shift).
DetRepCertificate certificate_from_pencil(const MPoly& p, const CMatrix& K, const std::vector<int>& n,
                                          double tol = 1e-7);

/// K = A of a unitary colligation realizing prod det^{s_r} <-p / p.
DetRepCertificate extract_v(const MPoly& p, const Colligation& c, double tol = 1e-7);

struct CertificateReport {
  bool contractive = false;
  bool divisible = false;
  bool self_reversive = false;
  bool shifts_ok = false;
  bool pointwise = false;
  bool inner = false;
  double norm_K = 0.0;
  double division_residual = 0.0;
  double quotient_mismatch = 0.0;
  double self_reversive_residual = 0.0;
  double gamma_mismatch = 0.0;
  double max_point_error = 0.0;
  double max_inner_defect = 0.0;
  std::vector<std::string> failures;
  bool pass() const { return failures.empty(); }
  std::string verdict() const;
};

/// Re-derives every invariant from the stored fields alone.
CertificateReport verify_certificate(const DetRepCertificate& cert, std::uint64_t seed = 0);

struct SearchOptions {
  int starts = 8;
  int iters = 300;  // Levenberg-Marquardt iterations per start
  double tol = 1e-7;
};

struct SearchResult {
  std::optional<DetRepCertificate> certificate;
  double best_residual = 0.0;
  int starts_used = 0;
  std::string message;
  bool found() const { return certificate.has_value(); }
};

/// Best-effort search for contractive K with det(I - K Z_n) = p v.
/// p is rescaled to constant term 1. A miss never means nonexistence.
SearchResult search_detrep(const MPoly& p, const std::vector<int>& n, const SearchOptions& opt = {},
                           std::uint64_t seed = 0);

}  // namespace polyball
