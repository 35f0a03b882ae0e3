#include "polyball/analysis.hpp"

#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

namespace polyball {

namespace {

template <class F>
void parallel_for(int count, int threads, F&& fn) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      for (int i = t; i < count; i += threads) fn(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace

InnerReport check_inner(const MPoly& q, const MPoly& p, int samples, std::uint64_t seed, double tol) {
  if (p.is_zero()) throw InvalidArgument("denominator must be nonzero");
  if (q.structure() != p.structure()) throw StructureMismatch("q and p structures differ");
  InnerReport rep;
  for (int i = 0; i < samples; ++i) {
    const MatrixPoint u = sample_shilov(p.structure(), derive_seed(seed, static_cast<std::uint64_t>(i)));
    ++rep.samples;
    const cplx pu = eval_point(p, u);
    if (std::abs(pu) < 1e-8) {
      ++rep.near_singular;
      continue;
    }
    rep.max_defect = std::max(rep.max_defect, std::abs(std::abs(eval_point(q, u) / pu) - 1.0));
  }
  rep.near_singular_fraction = rep.samples ? static_cast<double>(rep.near_singular) / rep.samples : 0.0;
  if (rep.samples == rep.near_singular)
    rep.verdict = "Inconclusive";
  else
    rep.verdict = rep.max_defect < tol ? "Pass" : "Fail";
  return rep;
}

RudinResult rudin_factorize(const MPoly& q, const MPoly& p, double tol) {
  if (q.is_zero() || p.is_zero()) throw InvalidArgument("q and p must be nonzero");
  if (q.structure() != p.structure()) throw StructureMismatch("q and p structures differ");
  RudinResult res(p.structure());
  const ReducedReverse rr = reduced_reverse(p);
  res.reversed = rr.poly;
  res.p_degrees = rr.degrees;
  const DetPowerFactorization f = factor_det_powers(q, tol);
  res.m = f.m;
  res.core = f.core;
  const MPoly& rev = rr.poly;
  cplx num = 0.0;
  double den = 0.0;
  for (const auto& [e, c] : rev.terms()) {
    num += std::conj(c) * f.core.coeff(e);
    den += std::norm(c);
  }
  res.gamma = num / den;
  res.residual = (f.core - rev * res.gamma).coeff_norm() / std::max(f.core.coeff_norm(), 1e-300);
  if (res.residual > tol) {
    res.message = "q is not a det-power multiple of the reverse of p";
  } else if (std::abs(std::abs(res.gamma) - 1.0) > tol) {
    res.message = "scalar between q and prod det^m <-p is not unimodular";
  } else {
    res.ok = true;
  }
  if (!res.ok) res.residual = std::max(res.residual, std::abs(std::abs(res.gamma) - 1.0));
  return res;
}

const char* to_string(StabilityMode m) { return m == StabilityMode::Open ? "Open" : "Closed"; }

namespace {

// Every block pulled back into the ball of the given radius.
MatrixPoint clamp_point(const BlockStructure& s, const double* x, double radius) {
  std::vector<CMatrix> blocks;
  int off = 0;
  for (int r = 0; r < s.k(); ++r) {
    const int l = s.ell(r);
    CMatrix b(l, l);
    for (int i = 0; i < l; ++i)
      for (int j = 0; j < l; ++j) {
        b(i, j) = cplx(x[off], x[off + 1]);
        off += 2;
      }
    const double nb = spectral_norm(b);
    if (nb > radius) b *= radius / nb;
    blocks.push_back(std::move(b));
  }
  return MatrixPoint(s, std::move(blocks));
}

std::vector<double> flatten(const MatrixPoint& z) {
  std::vector<double> x;
  const CVector c = z.coords();
  for (Eigen::Index v = 0; v < c.size(); ++v) {
    x.push_back(c(v).real());
    x.push_back(c(v).imag());
  }
  return x;
}

MatrixPoint rank_deficient_boundary(const BlockStructure& s, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<CMatrix> blocks;
  const int touching = static_cast<int>(rng() % static_cast<std::uint64_t>(s.k()));
  for (int r = 0; r < s.k(); ++r) {
    const int l = s.ell(r);
    const CMatrix U = haar_unitary(l, rng), V = haar_unitary(l, rng);
    RVector sv(l);
    for (int i = 0; i < l; ++i) sv(i) = unif(rng);
    if (r == touching || unif(rng) < 0.5) sv(0) = 1.0;
    blocks.push_back(U * sv.cast<cplx>().asDiagonal() * V.adjoint());
  }
  return MatrixPoint(s, std::move(blocks));
}

MatrixPoint scan_start(const BlockStructure& s, StabilityMode mode, std::uint64_t seed, int i) {
  if (mode == StabilityMode::Open) return sample_interior(s, seed);
  switch (i % 3) {
    case 0:
      return sample_interior(s, seed);
    case 1:
      return sample_shilov(s, seed);
    default:
      return rank_deficient_boundary(s, seed);
  }
}

struct NmContext {
  const MPoly* p;
  double radius;
};

double nm_objective(const gsl_vector* x, void* params) {
  const auto* ctx = static_cast<const NmContext*>(params);
  const MatrixPoint z = clamp_point(ctx->p->structure(), x->data, ctx->radius);
  return std::norm(eval_point(*ctx->p, z));
}

MatrixPoint nelder_mead(const MPoly& p, const MatrixPoint& start, double radius) {
  std::vector<double> x0 = flatten(start);
  const std::size_t n = x0.size();
  NmContext ctx{&p, radius};
  gsl_multimin_function fn{&nm_objective, n, &ctx};
  gsl_vector* x = gsl_vector_alloc(n);
  gsl_vector* step = gsl_vector_alloc(n);
  for (std::size_t i = 0; i < n; ++i) {
    gsl_vector_set(x, i, x0[i]);
    gsl_vector_set(step, i, 0.05);
  }
  gsl_multimin_fminimizer* m = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
  gsl_multimin_fminimizer_set(m, &fn, x, step);
  for (int it = 0; it < 4000; ++it) {
    if (gsl_multimin_fminimizer_iterate(m) != 0) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m), 1e-13) == GSL_SUCCESS) break;
    if (m->fval < 1e-24) break;
  }
  MatrixPoint best = clamp_point(p.structure(), m->x->data, radius);
  gsl_multimin_fminimizer_free(m);
  gsl_vector_free(step);
  gsl_vector_free(x);
  return best;
}

}  // namespace

StabilityReport stability_scan(const MPoly& p, StabilityMode mode, const StabilityOptions& opt,
                               std::uint64_t seed) {
  if (p.is_zero()) throw InvalidArgument("p must be nonzero");
  const BlockStructure& s = p.structure();
  StabilityReport rep;
  rep.mode = mode;
  rep.budget = opt.budget;
  rep.radius = mode == StabilityMode::Open ? 1.0 - 1e-6 : 1.0;

  std::vector<double> vals(static_cast<std::size_t>(opt.budget));
  parallel_for(opt.budget, opt.threads, [&](int i) {
    const MatrixPoint z = scan_start(s, mode, derive_seed(seed, static_cast<std::uint64_t>(i)), i);
    vals[static_cast<std::size_t>(i)] = std::abs(eval_point(p, z));
  });
  std::vector<int> order(static_cast<std::size_t>(opt.budget));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return vals[static_cast<std::size_t>(a)] < vals[static_cast<std::size_t>(b)]; });
  const int polish = std::min(opt.polish, opt.budget);
  std::vector<std::optional<MatrixPoint>> polished(static_cast<std::size_t>(polish));
  std::vector<double> pvals(static_cast<std::size_t>(polish));
  parallel_for(polish, opt.threads, [&](int k) {
    const int i = order[static_cast<std::size_t>(k)];
    const MatrixPoint z0 = scan_start(s, mode, derive_seed(seed, static_cast<std::uint64_t>(i)), i);
    MatrixPoint z = nelder_mead(p, z0, rep.radius);
    pvals[static_cast<std::size_t>(k)] = std::abs(eval_point(p, z));
    polished[static_cast<std::size_t>(k)] = std::move(z);
  });
  rep.polished = polish;
  rep.min_abs = std::numeric_limits<double>::infinity();
  for (int k = 0; k < polish; ++k)
    if (pvals[static_cast<std::size_t>(k)] < rep.min_abs) {
      rep.min_abs = pvals[static_cast<std::size_t>(k)];
      rep.argmin = polished[static_cast<std::size_t>(k)];
    }
  if (rep.argmin) rep.argmin_class = to_string(rep.argmin->classify(1e-9));
  rep.verdict = rep.min_abs < opt.zero_tol ? "ZeroFound" : "NoZeroFound";
  return rep;
}

double agler_value(const MatPoly& Q, const MatPoly& P, const CommutingTuple& t) {
  const CMatrix Pt = eval_tuple(P, t);
  if (condition_number(Pt) > 1e12) throw NumericalFailure("P(T) is numerically singular");
  const CMatrix Qt = eval_tuple(Q, t);
  return spectral_norm(Qt * Pt.partialPivLu().inverse());
}

AglerBoundReport agler_lower_bound(const MatPoly& Q, const MatPoly& P, int tuples, int N_max,
                                   std::uint64_t seed, int threads) {
  if (P.rows() != P.cols() || Q.cols() != P.rows()) throw StructureMismatch("need Q P^{-1} with P square");
  if (Q.structure() != P.structure()) throw StructureMismatch("Q and P structures differ");
  if (N_max < 1 || tuples < 0) throw InvalidArgument("N_max must be >= 1 and tuples >= 0");
  AglerBoundReport rep;
  rep.N_max = N_max;
  const int total = tuples * N_max;
  std::vector<double> vals(static_cast<std::size_t>(total), -1.0);
  auto tuple_of = [&](int idx) {
    const int N = 1 + idx / std::max(tuples, 1);
    const int j = idx % std::max(tuples, 1);
    const auto fam = j % 2 == 0 ? TupleFamily::Diagonalizable : TupleFamily::SingleGenerator;
    return sample_commuting_tuple(P.structure(), N, fam,
                                  derive_seed(derive_seed(seed, static_cast<std::uint64_t>(N)), static_cast<std::uint64_t>(j)));
  };
  parallel_for(total, threads, [&](int idx) {
    try {
      vals[static_cast<std::size_t>(idx)] = agler_value(Q, P, tuple_of(idx));
    } catch (const NumericalFailure&) {
    }
  });
  int best = -1;
  for (int idx = 0; idx < total; ++idx) {
    ++rep.tried;
    const double v = vals[static_cast<std::size_t>(idx)];
    if (v < 0.0) {
      ++rep.skipped;
      continue;
    }
    if (best < 0 || v > rep.bound) {
      rep.bound = v;
      best = idx;
    }
  }
  if (best >= 0) {
    rep.witness = tuple_of(best);
    rep.witness_N = rep.witness->N();
    rep.witness_index = best % tuples;
    rep.witness_family = rep.witness_index % 2 == 0 ? "Diagonalizable" : "SingleGenerator";
    rep.verdict = "Bound";
  } else {
    rep.verdict = "Inconclusive";
  }
  return rep;
}

LiftResult eventual_sa_lift(const MPoly& q, const MPoly& p, const LiftOptions& opt, std::uint64_t seed) {
  LiftResult res;
  const BlockStructure& st = p.structure();
  res.rudin = rudin_factorize(q, p);
  if (!res.rudin->ok) {
    res.verdict = "PreconditionFailed";
    res.message = "q/p is not of the form gamma prod det^m <-p / p: " + res.rudin->message;
    return res;
  }
  res.stability = stability_scan(p, StabilityMode::Closed, opt.stability, seed);
  if (res.stability->zero_found()) {
    res.verdict = "PreconditionFailed";
    res.message = "p has a zero in the closed polyball, so it is not strongly stable";
    return res;
  }
  std::vector<std::vector<int>> schedule = opt.n_schedule;
  if (schedule.empty())
    for (int j = 0; j <= 2; ++j) {
      std::vector<int> n;
      for (int r = 0; r < st.k(); ++r) n.push_back(res.rudin->p_degrees[static_cast<std::size_t>(r)] + j);
      schedule.push_back(n);
    }
  res.best_residual = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const SearchResult sr = search_detrep(p, schedule[i], opt.search, derive_seed(seed, i));
    res.best_residual = std::min(res.best_residual, sr.best_residual);
    if (!sr.found()) continue;
    res.certificate = sr.certificate;
    res.s = sr.certificate->s;
    break;
  }
  if (!res.certificate) {
    res.verdict = "NotFound";
    res.message = "no contractive determinantal representation found on the schedule";
    return res;
  }
  const MPoly Q = det_power_product(st, res.s) * q;
  int g = 0;
  for (const MPoly* x : {&Q, &p})
    if (auto t = x->total_degree()) g = std::max(g, *t);
  res.synthesis = synthesize(MatPoly::scalar(p), MatPoly::scalar(Q), g, opt.gram, seed);
  if (res.synthesis->success()) {
    res.verdict = "Success";
  } else {
    res.verdict = "NotFound";
    res.message = "certificate found but realization synthesis failed: " + res.synthesis->verdict;
  }
  return res;
}

}  // namespace polyball
