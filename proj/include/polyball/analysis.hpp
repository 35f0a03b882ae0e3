#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "polyball/detrep.hpp"
#include "polyball/realization.hpp"

namespace polyball {

struct InnerReport {
  int samples = 0;
  int near_singular = 0;       // samples with |p(U)| < 1e-8
  double near_singular_fraction = 0.0;
  double max_defect = 0.0;     // max ||q(U)/p(U)| - 1|
  std::string verdict;         // Pass, Fail, Inconclusive
  bool pass() const { return verdict == "Pass"; }
};

/// Unimodularity of q/p on the Shilov boundary.
InnerReport check_inner(const MPoly& q, const MPoly& p, int samples = 200, std::uint64_t seed = 0,
                        double tol = 1e-8);

struct RudinResult {
  bool ok = false;
  std::vector<int> m;
  MPoly core;               // q with the det powers removed
  MPoly reversed;           // reduced reverse of p
  DegreeVector p_degrees;   // reverse degrees used for p
  cplx gamma = 1.0;         // q = gamma prod det^m <-p
  double residual = 0.0;
  std::string message;
  explicit RudinResult(const BlockStructure& s) : core(s), reversed(s) {}
};

/// Writes q = gamma prod det^{m_r} <-p with |gamma| = 1; ok = false is the
/// NotInnerForm outcome.
RudinResult rudin_factorize(const MPoly& q, const MPoly& p, double tol = 1e-9);

enum class StabilityMode { Open, Closed };
const char* to_string(StabilityMode m);

struct StabilityReport {
  StabilityMode mode = StabilityMode::Open;
  double min_abs = 0.0;
  std::optional<MatrixPoint> argmin;
  std::string argmin_class;
  int budget = 0;
  int polished = 0;
  double radius = 1.0;
  std::string verdict;  // NoZeroFound, ZeroFound
  bool zero_found() const { return verdict == "ZeroFound"; }
};

struct StabilityOptions {
  int budget = 10000;
  int polish = 32;
  int threads = 1;
  double zero_tol = 1e-8;
};

/// Multi-start minimization of |p|^2 over the open or closed polyball.
StabilityReport stability_scan(const MPoly& p, StabilityMode mode, const StabilityOptions& opt = {},
                               std::uint64_t seed = 0);

struct AglerBoundReport {
  double bound = 0.0;
  std::optional<CommutingTuple> witness;
  int witness_N = 0;
  int witness_index = -1;
  std::string witness_family;
  int tried = 0;
  int skipped = 0;
  int N_min = 1, N_max = 1;
  std::string verdict;  // Bound, Inconclusive
};

/// ||Q(T) P(T)^{-1}||_2 on the s N-dimensional inflation.
double agler_value(const MatPoly& Q, const MatPoly& P, const CommutingTuple& t);

/// Max of agler_value over `tuples` commuting tuples per N in 1..N_max,
/// alternating tuple families. Tuple seeds depend only on (seed, N, index).
AglerBoundReport agler_lower_bound(const MatPoly& Q, const MatPoly& P, int tuples, int N_max,
                                   std::uint64_t seed = 0, int threads = 1);

struct LiftOptions {
  std::vector<std::vector<int>> n_schedule;  // empty: tau(p) + j for j = 0..2
  SearchOptions search;
  StabilityOptions stability;
  GramOptions gram;
};

struct LiftResult {
  std::string verdict;  // Success, PreconditionFailed, NotFound
  std::string message;
  std::optional<RudinResult> rudin;
  std::optional<StabilityReport> stability;
  std::optional<DetRepCertificate> certificate;
  std::optional<SynthesisResult> synthesis;
  std::vector<int> s;
  double best_residual = 0.0;
  bool success() const { return verdict == "Success"; }
};

/// Finds shifts s with prod det^{s_r} q/p Schur-Agler and realizes the result.
LiftResult eventual_sa_lift(const MPoly& q, const MPoly& p, const LiftOptions& opt = {},
                            std::uint64_t seed = 0);

}  // namespace polyball
