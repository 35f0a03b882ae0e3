#include "polyball/detrep.hpp"

#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace polyball {

DetRepCertificate::DetRepCertificate()
    : structure(std::vector<int>{1}), p(structure), v(structure) {}

namespace {

// Entries of I - K Z_n as linear polynomials.
std::vector<MPoly> pencil_entries(const CMatrix& K, const BlockStructure& s, const std::vector<int>& n) {
  const int M = inflated_side(s, n);
  if (K.rows() != M || K.cols() != M)
    throw StructureMismatch("pencil matrix must have side sum_r l_r n_r = " + std::to_string(M));
  std::vector<MPoly> E(static_cast<std::size_t>(M * M), MPoly(s));
  for (int a = 0; a < M; ++a) E[static_cast<std::size_t>(a * M + a)] = MPoly::constant(s, 1.0);
  int off = 0;
  for (int r = 0; r < s.k(); ++r) {
    const int l = s.ell(r), nr = n[static_cast<std::size_t>(r)];
    for (int j = 0; j < l; ++j)
      for (int m = 0; m < nr; ++m) {
        const int col = off + j * nr + m;
        for (int a = 0; a < M; ++a) {
          MPoly& e = E[static_cast<std::size_t>(a * M + col)];
          for (int i = 0; i < l; ++i) {
            const cplx k = K(a, off + i * nr + m);
            if (k != cplx(0.0)) {
              Exponent x(static_cast<std::size_t>(s.d()), 0);
              x[static_cast<std::size_t>(s.flat_index(r, i, j))] = 1;
              e.add_term(x, -k);
            }
          }
          e.normalize(0.0);
        }
      }
    off += l * nr;
  }
  return E;
}

MPoly laplace_det(const std::vector<MPoly>& E, int M, const BlockStructure& s) {
  // D[mask] = det of rows 0..|mask|-1 restricted to the columns in mask.
  std::vector<MPoly> D(std::size_t{1} << M, MPoly(s));
  D[0] = MPoly::constant(s, 1.0);
  for (unsigned mask = 1; mask < (1u << M); ++mask) {
    const int row = std::popcount(mask) - 1;
    MPoly acc(s);
    int pos = 0;
    for (int c = 0; c < M; ++c) {
      if (!(mask & (1u << c))) continue;
      const MPoly& e = E[static_cast<std::size_t>(row * M + c)];
      if (!e.is_zero()) {
        const int above = std::popcount(mask) - 1 - pos;  // columns of mask right of c
        MPoly term = e * D[mask & ~(1u << c)];
        acc = (above % 2 == 0) ? acc + term : acc - term;
      }
      ++pos;
    }
    D[mask] = std::move(acc);
  }
  return D[(1u << M) - 1];
}

MPoly bareiss_det(std::vector<MPoly> A, int M, const BlockStructure& s) {
  MPoly prev = MPoly::constant(s, 1.0);
  auto at = [&](int i, int j) -> MPoly& { return A[static_cast<std::size_t>(i * M + j)]; };
  for (int k = 0; k + 1 < M; ++k) {
    for (int i = k + 1; i < M; ++i)
      for (int j = k + 1; j < M; ++j) {
        const MPoly num = at(k, k) * at(i, j) - at(i, k) * at(k, j);
        const DivisionResult q = exact_divide(num, prev);
        if (!q.divisible) throw NumericalFailure("fraction-free elimination lost exactness");
        at(i, j) = q.quotient;
      }
    prev = at(k, k);
  }
  return at(M - 1, M - 1);
}

// Remainder of f on division by g; linear in f, nothing dropped.
MPoly linear_remainder(const MPoly& f, const MPoly& g) {
  const BlockStructure& s = f.structure();
  const auto [lt, lc] = g.leading_term();
  MPoly::TermMap work = f.terms();
  MPoly rem(s);
  while (!work.empty()) {
    auto it = std::prev(work.end());
    const Exponent e = it->first;
    const cplx c = it->second;
    work.erase(it);
    bool divides = true;
    for (std::size_t v = 0; v < e.size(); ++v)
      if (e[v] < lt[v]) {
        divides = false;
        break;
      }
    if (!divides) {
      rem.add_term(e, c);
      continue;
    }
    const cplx q = c / lc;
    for (const auto& [ge, gc] : g.terms()) {
      if (ge == lt) continue;
      Exponent x = e;
      for (std::size_t v = 0; v < x.size(); ++v) x[v] = static_cast<std::uint16_t>(x[v] - lt[v] + ge[v]);
      work[x] -= q * gc;
    }
  }
  return rem;
}

bool same_degrees(const DegreeVector& a, const DegreeVector& b) { return a == b; }

}  // namespace

MPoly det_pencil(const CMatrix& K, const BlockStructure& s, const std::vector<int>& n) {
  if (static_cast<int>(n.size()) != s.k()) throw StructureMismatch("n must have one entry per block");
  for (int x : n)
    if (x < 0) throw InvalidArgument("block multiplicities must be nonnegative");
  const int M = inflated_side(s, n);
  if (M == 0) {
    if (K.size() != 0) throw StructureMismatch("pencil matrix must be empty for n = 0");
    return MPoly::constant(s, 1.0);
  }
  const auto E = pencil_entries(K, s, n);
  MPoly det = M <= 6 ? laplace_det(E, M, s) : bareiss_det(E, M, s);
  det.normalize();
  // Constant term of det(I - K Z_n) is exactly one.
  det.set_term(Exponent(static_cast<std::size_t>(s.d()), 0), 1.0);
  return det;
}

PqReport pq_identity_check(const Colligation& c, int trials, std::uint64_t seed, double tol) {
  if (c.s() != 1) throw InvalidArgument("pq identity needs a scalar colligation (s = 1)");
  if (!c.is_unitary()) throw InvalidArgument("pq identity needs a unitary colligation");
  PqReport rep;
  const int M = c.state_dim();
  const cplx lambda = c.lambda();
  for (int t = 0; t < trials; ++t) {
    const MatrixPoint z = sample_interior(c.structure(), derive_seed(seed, static_cast<std::uint64_t>(t)));
    const CMatrix Zn = inflate(z, c.n());
    CMatrix big(M + 1, M + 1);
    big.topLeftCorner(M, M) = CMatrix::Identity(M, M) - c.A() * Zn;
    big.topRightCorner(M, 1) = c.B();
    big.bottomLeftCorner(1, M) = -c.C() * Zn;
    big.bottomRightCorner(1, 1) = c.D();
    const cplx lhs = big.determinant();
    const cplx rhs = M == 0 ? lambda : lambda * CMatrix(c.A().adjoint() - Zn).determinant();
    const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
    rep.max_deviation = std::max(rep.max_deviation, std::abs(lhs - rhs) / scale);
    ++rep.trials;
  }
  rep.pass = rep.max_deviation < tol;
  return rep;
}

MPoly lifted_numerator(const DetRepCertificate& cert) {
  return det_power_product(cert.structure, cert.s) * reverse(cert.p, cert.p_degrees);
}

cplx lifted_value(const DetRepCertificate& cert, const MatrixPoint& z) {
  return eval_point(lifted_numerator(cert), z) / eval_point(cert.p, z);
}

DetRepCertificate certificate_from_pencil(const MPoly& p, const CMatrix& K, const std::vector<int>& n,
                                          double tol) {
  if (p.is_zero()) throw InvalidArgument("p must be nonzero");
  const BlockStructure& st = p.structure();
  DetRepCertificate cert;
  cert.structure = st;
  cert.p = p;
  cert.n = n;
  cert.K = K;
  const MPoly pencil = det_pencil(K, st, n);
  const DivisionResult div = exact_divide(pencil, p, tol);
  if (!div.divisible)
    throw NotDivisible("det(I - K Z_n) is not divisible by p (residual " + std::to_string(div.residual) + ")");
  cert.v = div.quotient;
  cert.division_residual = div.residual;
  cert.p_degrees = reduced_reverse(p).degrees;
  cert.v_degrees = reduced_reverse(cert.v).degrees;
  const SelfReversiveResult sr = is_almost_self_reversive(cert.v, cert.v_degrees, tol);
  cert.self_reversive_residual = sr.residual;
  if (!sr.holds || !sr.gamma)
    throw SelfReversiveFail("cofactor v is not almost self-reversive (residual " + std::to_string(sr.residual) + ")");
  cert.gamma = *sr.gamma;
  for (int r = 0; r < st.k(); ++r) {
    const int sr_ = n[static_cast<std::size_t>(r)] - cert.p_degrees[static_cast<std::size_t>(r)] -
                    cert.v_degrees[static_cast<std::size_t>(r)];
    if (sr_ < 0) throw InvalidCertificate("negative det shift in block " + std::to_string(r + 1));
    cert.s.push_back(sr_);
  }
  cert.contractivity_margin = 1.0 - spectral_norm(K);
  return cert;
}

DetRepCertificate extract_v(const MPoly& p, const Colligation& c, double tol) {
  if (p.structure() != c.structure()) throw StructureMismatch("p and colligation structures differ");
  if (c.s() != 1) throw InvalidArgument("extract_v needs a scalar colligation (s = 1)");
  return certificate_from_pencil(p, c.A(), c.n(), tol);
}

std::string CertificateReport::verdict() const {
  return pass() ? "EventualAglerDenominator-CERTIFIED" : "Fail";
}

CertificateReport verify_certificate(const DetRepCertificate& cert, std::uint64_t seed) {
  CertificateReport rep;
  const BlockStructure& st = cert.structure;
  auto fail = [&](const std::string& why) { rep.failures.push_back(why); };
  if (cert.p.structure() != st || cert.v.structure() != st || static_cast<int>(cert.n.size()) != st.k() ||
      static_cast<int>(cert.s.size()) != st.k() || static_cast<int>(cert.p_degrees.size()) != st.k() ||
      static_cast<int>(cert.v_degrees.size()) != st.k() || cert.K.rows() != inflated_side(st, cert.n) ||
      cert.K.cols() != cert.K.rows()) {
    fail("shape: certificate fields disagree with the structure");
    return rep;
  }
  if (cert.p.is_zero() || cert.v.is_zero()) {
    fail("shape: p and v must be nonzero");
    return rep;
  }

  rep.norm_K = cert.K.size() == 0 ? 0.0 : spectral_norm(cert.K);
  rep.contractive = rep.norm_K <= 1.0 + 1e-10;
  if (!rep.contractive) fail("contractivity: ||K|| = " + std::to_string(rep.norm_K));

  const MPoly pencil = det_pencil(cert.K, st, cert.n);
  const DivisionResult div = exact_divide(pencil, cert.p, 1e-7);
  rep.division_residual = div.residual;
  rep.quotient_mismatch = div.quotient.distance(cert.v) / std::max(1.0, cert.v.max_abs_coeff());
  rep.divisible = div.divisible && rep.quotient_mismatch <= 1e-7;
  if (!rep.divisible) fail("division: det(I - K Z_n) != p v");

  SelfReversiveResult sr;
  try {
    sr = is_almost_self_reversive(cert.v, cert.v_degrees, 1e-7);
  } catch (const InvalidArgument&) {
    sr.residual = std::numeric_limits<double>::infinity();
  }
  rep.self_reversive_residual = sr.residual;
  rep.gamma_mismatch = sr.gamma ? std::abs(*sr.gamma - cert.gamma) : 1.0;
  rep.self_reversive = sr.holds && rep.gamma_mismatch <= 1e-8 && std::abs(std::abs(cert.gamma) - 1.0) <= 1e-8;
  if (!rep.self_reversive) fail("self-reversive: reverse(v) != gamma v");

  rep.shifts_ok = same_degrees(reduced_reverse(cert.p).degrees, cert.p_degrees) &&
                  same_degrees(reduced_reverse(cert.v).degrees, cert.v_degrees);
  for (int r = 0; r < st.k(); ++r) {
    const auto u = static_cast<std::size_t>(r);
    if (cert.s[u] < 0 || cert.s[u] != cert.n[u] - cert.p_degrees[u] - cert.v_degrees[u]) rep.shifts_ok = false;
  }
  if (!rep.shifts_ok) fail("shifts: s_r != n_r - deg_r p - deg_r v or negative");

  for (int t = 0; t < 50; ++t) {
    const MatrixPoint z = sample_interior(st, derive_seed(seed, static_cast<std::uint64_t>(t)));
    const cplx lhs = eval_point(cert.p, z) * eval_point(cert.v, z);
    const cplx rhs = cert.K.size() == 0
                         ? cplx(1.0)
                         : CMatrix(CMatrix::Identity(cert.K.rows(), cert.K.rows()) - cert.K * inflate(z, cert.n))
                               .determinant();
    rep.max_point_error =
        std::max(rep.max_point_error, std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-300}));
  }
  rep.pointwise = rep.max_point_error <= 1e-8;
  if (!rep.pointwise) fail("pointwise: p v != det(I - K Z_n) at sampled points");

  if (rep.shifts_ok) {
    const MPoly num = lifted_numerator(cert);
    for (int t = 0; t < 50; ++t) {
      const MatrixPoint u = sample_shilov(st, derive_seed(seed ^ 0x9E3779B9ULL, static_cast<std::uint64_t>(t)));
      const cplx pu = eval_point(cert.p, u);
      if (std::abs(pu) < 1e-8) continue;
      rep.max_inner_defect = std::max(rep.max_inner_defect, std::abs(std::abs(eval_point(num, u) / pu) - 1.0));
    }
    rep.inner = rep.max_inner_defect <= 1e-8;
    if (!rep.inner) fail("inner: lifted function not unimodular on the Shilov boundary");
  }
  return rep;
}

namespace {

CMatrix contraction_of(const Eigen::VectorXd& x, int M) {
  CMatrix X(M, M);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) X(i, j) = cplx(x(2 * (i * M + j)), x(2 * (i * M + j) + 1));
  Eigen::SelfAdjointEigenSolver<CMatrix> es(CMatrix::Identity(M, M) + X.adjoint() * X);
  const RVector inv_sqrt = es.eigenvalues().cwiseSqrt().cwiseInverse();
  return X * es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().adjoint();
}

Eigen::VectorXd parameters_of(const CMatrix& X) {
  const Eigen::Index M = X.rows();
  Eigen::VectorXd x(2 * M * M);
  for (Eigen::Index i = 0; i < M; ++i)
    for (Eigen::Index j = 0; j < M; ++j) {
      x(2 * (i * M + j)) = X(i, j).real();
      x(2 * (i * M + j) + 1) = X(i, j).imag();
    }
  return x;
}

struct PencilFunctor {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  const MPoly* p;
  const std::vector<int>* n;
  const std::vector<Exponent>* support;
  int M;
  int nvalues;

  int inputs() const { return 2 * M * M; }
  int values() const { return nvalues; }

  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
    const MPoly rem = linear_remainder(det_pencil(contraction_of(x, M), p->structure(), *n), *p);
    f.setZero(nvalues);
    for (std::size_t a = 0; a < support->size(); ++a) {
      const cplx c = rem.coeff((*support)[a]);
      f(static_cast<Eigen::Index>(2 * a)) = c.real();
      f(static_cast<Eigen::Index>(2 * a + 1)) = c.imag();
    }
    return 0;
  }
};

double max_remainder(const MPoly& p, const CMatrix& K, const std::vector<int>& n) {
  return linear_remainder(det_pencil(K, p.structure(), n), p).max_abs_coeff();
}

}  // namespace

SearchResult search_detrep(const MPoly& p_in, const std::vector<int>& n, const SearchOptions& opt,
                           std::uint64_t seed) {
  if (p_in.is_zero()) throw InvalidArgument("p must be nonzero");
  const BlockStructure& st = p_in.structure();
  if (static_cast<int>(n.size()) != st.k()) throw StructureMismatch("n must have one entry per block");
  const cplx c0 = p_in.constant_term();
  if (std::abs(c0) < 1e-12) throw InvalidArgument("p vanishes at the origin, so it is not stable");
  const MPoly p = p_in * (1.0 / c0);
  const int M = inflated_side(st, n);

  SearchResult res;
  res.best_residual = std::numeric_limits<double>::infinity();
  if (M == 0) {
    res.starts_used = 1;
    res.best_residual = max_remainder(p, CMatrix(0, 0), n);
    try {
      auto cert = certificate_from_pencil(p, CMatrix(0, 0), n, opt.tol);
      if (verify_certificate(cert, seed).pass()) res.certificate = std::move(cert);
    } catch (const Error& e) {
      res.message = e.what();
    }
    if (!res.found() && res.message.empty()) res.message = "NotFound";
    return res;
  }

  int total = 0;
  for (int r = 0; r < st.k(); ++r) total += st.ell(r) * n[static_cast<std::size_t>(r)];
  const std::vector<Exponent> support = monomials_up_to(st.d(), total);
  PencilFunctor fn{&p, &n, &support, M, std::max(2 * static_cast<int>(support.size()), 2 * M * M)};

  for (int start = 0; start < opt.starts; ++start) {
    Eigen::VectorXd x;
    if (start == 0) {
      x = Eigen::VectorXd::Zero(2 * M * M);
    } else {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(start)));
      x = parameters_of(ginibre(M, M, rng) * 0.7);
    }
    Eigen::NumericalDiff<PencilFunctor> nd(fn);
    Eigen::LevenbergMarquardt<Eigen::NumericalDiff<PencilFunctor>> lm(nd);
    lm.parameters.maxfev = opt.iters * (2 * M * M + 1);
    lm.parameters.xtol = 1e-15;
    lm.parameters.ftol = 1e-15;
    lm.minimize(x);
    ++res.starts_used;
    const CMatrix K = contraction_of(x, M);
    const double r = max_remainder(p, K, n);
    if (r < res.best_residual) res.best_residual = r;
    if (r >= opt.tol) continue;
    try {
      auto cert = certificate_from_pencil(p, K, n, opt.tol);
      if (verify_certificate(cert, seed).pass()) {
        res.certificate = std::move(cert);
        res.best_residual = r;
        return res;
      }
      res.message = "candidate failed verification";
    } catch (const Error& e) {
      res.message = e.what();
    }
  }
  if (res.message.empty()) res.message = "NotFound";
  return res;
}

}  // namespace polyball
