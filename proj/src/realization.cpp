#include "polyball/realization.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace polyball {

Colligation::Colligation(BlockStructure structure, std::vector<int> n, int s, CMatrix A, CMatrix B,
                         CMatrix C, CMatrix D)
    : structure_(std::move(structure)),
      n_(std::move(n)),
      s_(s),
      A_(std::move(A)),
      B_(std::move(B)),
      C_(std::move(C)),
      D_(std::move(D)) {
  const int M = inflated_side(structure_, n_);
  if (s_ < 1) throw InvalidArgument("colligation output size must be >= 1");
  if (A_.rows() != M || A_.cols() != M) throw StructureMismatch("colligation A has wrong shape");
  if (B_.rows() != M || B_.cols() != s_) throw StructureMismatch("colligation B has wrong shape");
  if (C_.rows() != s_ || C_.cols() != M) throw StructureMismatch("colligation C has wrong shape");
  if (D_.rows() != s_ || D_.cols() != s_) throw StructureMismatch("colligation D has wrong shape");
}

Colligation Colligation::from_system(const BlockStructure& structure, std::vector<int> n, int s,
                                     const CMatrix& system) {
  const int M = inflated_side(structure, n);
  if (system.rows() != M + s || system.cols() != M + s)
    throw StructureMismatch("system matrix has wrong side");
  return Colligation(structure, std::move(n), s, system.topLeftCorner(M, M),
                     system.topRightCorner(M, s), system.bottomLeftCorner(s, M),
                     system.bottomRightCorner(s, s));
}

CMatrix Colligation::system() const {
  const int M = state_dim();
  CMatrix u(M + s_, M + s_);
  u.topLeftCorner(M, M) = A_;
  u.topRightCorner(M, s_) = B_;
  u.bottomLeftCorner(s_, M) = C_;
  u.bottomRightCorner(s_, s_) = D_;
  return u;
}

double Colligation::unitary_defect() const { return unitarity_defect(system()); }

cplx Colligation::lambda() const { return system().determinant(); }

Colligation random_unitary_colligation(const BlockStructure& s, const std::vector<int>& n, int out,
                                       std::uint64_t seed) {
  Rng rng(seed);
  const int M = inflated_side(s, n);
  return Colligation::from_system(s, n, out, haar_unitary(M + out, rng));
}

namespace {

constexpr double kConditionCap = 1e12;

CMatrix solve_checked(const CMatrix& R, const CMatrix& rhs) {
  if (condition_number(R) > kConditionCap)
    throw NumericalFailure("resolvent I - A Z_n is numerically singular");
  return R.partialPivLu().solve(rhs);
}

}  // namespace

CMatrix eval_transfer(const Colligation& c, const MatrixPoint& z) {
  if (z.structure() != c.structure()) throw StructureMismatch("point and colligation structures differ");
  if (c.state_dim() == 0) return c.D();
  const CMatrix Zn = inflate(z, c.n());
  const CMatrix R = CMatrix::Identity(c.state_dim(), c.state_dim()) - c.A() * Zn;
  return c.D() + c.C() * Zn * solve_checked(R, c.B());
}

CMatrix eval_transfer(const Colligation& c, const CommutingTuple& t) {
  if (t.structure() != c.structure()) throw StructureMismatch("tuple and colligation structures differ");
  const int N = t.N();
  const CMatrix IN = CMatrix::Identity(N, N);
  if (c.state_dim() == 0) return kron(c.D(), IN);
  const CMatrix Zn = inflate(t, c.n());
  const int side = c.state_dim() * N;
  const CMatrix R = CMatrix::Identity(side, side) - kron(c.A(), IN) * Zn;
  return kron(c.D(), IN) + kron(c.C(), IN) * Zn * solve_checked(R, kron(c.B(), IN));
}

ColligationReport verify_colligation(const Colligation& c, const VerifyOptions& opt) {
  ColligationReport rep;
  rep.unitary_defect = c.unitary_defect();
  rep.unitary = rep.unitary_defect <= Colligation::kUnitaryTol;
  const auto& s = c.structure();
  const CMatrix I = CMatrix::Identity(c.s(), c.s());
  for (int i = 0; i < opt.shilov_samples; ++i) {
    const MatrixPoint u = sample_shilov(s, derive_seed(opt.seed, static_cast<std::uint64_t>(i)));
    try {
      const CMatrix f = eval_transfer(c, u);
      rep.max_inner_defect = std::max(rep.max_inner_defect, spectral_norm(f.adjoint() * f - I));
      ++rep.shilov_samples;
    } catch (const NumericalFailure&) {
      // boundary point where the resolvent blows up
    }
  }
  rep.inner = rep.shilov_samples > 0 && rep.max_inner_defect < opt.inner_tol;
  if (opt.shilov_samples == 0) rep.inner = true;
  for (int i = 0; i < opt.tuples; ++i) {
    const int N = 1 + i % std::max(1, opt.N_max);
    const auto family = (i / std::max(1, opt.N_max)) % 2 == 0 ? TupleFamily::Diagonalizable
                                                                  : TupleFamily::SingleGenerator;
    const CommutingTuple t =
        sample_commuting_tuple(s, N, family, derive_seed(opt.seed ^ 0x5bd1e995ULL, static_cast<std::uint64_t>(i)));
    try {
      rep.max_tuple_norm = std::max(rep.max_tuple_norm, spectral_norm(eval_transfer(c, t)));
      ++rep.tuple_samples;
    } catch (const NumericalFailure&) {
      ++rep.tuples_skipped;
    }
  }
  rep.schur_agler = rep.max_tuple_norm <= 1.0 + opt.agler_slack;
  return rep;
}

// ---------------------------------------------------------------------------

CMatrix choi_matrix(const std::function<CMatrix(const CMatrix&)>& phi, int a, int b) {
  CMatrix ch(a * b, a * b);
  for (int i = 0; i < a; ++i)
    for (int j = 0; j < a; ++j) {
      CMatrix e = CMatrix::Zero(a, a);
      e(i, j) = 1.0;
      const CMatrix v = phi(e);
      if (v.rows() != b || v.cols() != b) throw StructureMismatch("map output has wrong shape");
      ch.block(i * b, j * b, b, b) = v;
    }
  return ch;
}

CMatrix choi_factor(const CMatrix& choi, int a, int b) {
  const int ab = a * b;
  if (choi.rows() != ab || choi.cols() != ab) throw StructureMismatch("Choi matrix has wrong side");
  const double scale = std::max(1.0, choi.cwiseAbs().maxCoeff());
  if ((choi - choi.adjoint()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw NotCompletelyPositive("Choi matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (choi + choi.adjoint()));
  const RVector& lam = es.eigenvalues();
  const double lmax = lam.maxCoeff();
  if (lam.minCoeff() < -1e-9 * std::max(1.0, lmax))
    throw NotCompletelyPositive("Choi matrix has a negative eigenvalue");
  // Choi = W^* W with W = Lambda^{1/2} V^*; Y stacks the a column blocks of W.
  CMatrix W = CMatrix::Zero(ab, ab);
  int row = 0;
  for (int k = ab - 1; k >= 0; --k) {
    if (lmax <= 0.0 || lam(k) <= 1e-11 * lmax) continue;
    W.row(row++) = std::sqrt(lam(k)) * es.eigenvectors().col(k).adjoint();
  }
  CMatrix Y(a * ab, b);
  for (int i = 0; i < a; ++i) Y.block(i * ab, 0, ab, b) = W.block(0, i * b, ab, b);
  return Y;
}

CMatrix apply_choi_factor(const CMatrix& Y, const CMatrix& X, int a, int b) {
  const int ab = a * b;
  CMatrix out = CMatrix::Zero(b, b);
  for (int i = 0; i < a; ++i)
    for (int j = 0; j < a; ++j)
      if (X(i, j) != cplx(0.0))
        out += X(i, j) * Y.block(i * ab, 0, ab, b).adjoint() * Y.block(j * ab, 0, ab, b);
  return out;
}

// ---------------------------------------------------------------------------

std::vector<Exponent> monomials_up_to(int d, int deg) {
  std::vector<Exponent> out;
  if (deg < 0) return out;
  Exponent e(static_cast<std::size_t>(d), 0);
  std::function<void(int, int)> rec = [&](int v, int left) {
    if (v == d) {
      out.push_back(e);
      return;
    }
    for (int a = 0; a <= left; ++a) {
      e[static_cast<std::size_t>(v)] = static_cast<std::uint16_t>(a);
      rec(v + 1, left - a);
    }
    e[static_cast<std::size_t>(v)] = 0;
  };
  rec(0, deg);
  std::sort(out.begin(), out.end(), GrevlexLess{});
  return out;
}

long long binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

namespace {

cplx monomial_value(const Exponent& e, const CVector& z) {
  cplx v = 1.0;
  for (std::size_t i = 0; i < e.size(); ++i)
    for (int p = 0; p < e[i]; ++p) v *= z(static_cast<Eigen::Index>(i));
  return v;
}

// Linear map from the Gram blocks M_r to the coefficients of w^bar^alpha z^beta,
// together with the target coefficients of P^*P - Q^*Q.
class GramSystem {
 public:
  GramSystem(const MatPoly& P, const MatPoly& Q, int g) : s_(P.structure()) {
    if (P.rows() != P.cols() || Q.rows() != Q.cols() || P.rows() != Q.rows() ||
        P.structure() != Q.structure())
      throw StructureMismatch("P and Q must be s x s over one structure");
    out_ = P.rows();
    g_ = g;
    low_ = monomials_up_to(s_.d(), g - 1);
    high_ = monomials_up_to(s_.d(), g);
    for (std::size_t a = 0; a < high_.size(); ++a) high_index_[high_[a]] = static_cast<int>(a);
    const int N = static_cast<int>(low_.size());
    int off = 0;
    for (int r = 0; r < s_.k(); ++r) {
      side_.push_back(s_.ell(r) * N * out_);
      col_off_.push_back(off);
      off += side_.back() * side_.back();
    }
    ncols_ = off;
    const int H = static_cast<int>(high_.size());
    nrows_ = H * H * out_ * out_;
    L_ = CMatrix::Zero(nrows_, ncols_);
    for (int r = 0; r < s_.k(); ++r) {
      const int l = s_.ell(r);
      for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b)
          for (int t = 0; t < out_; ++t)
            for (int u = 0; u < out_; ++u) {
              for (int i = 0; i < l; ++i)
                L_(row(low_[static_cast<std::size_t>(a)], low_[static_cast<std::size_t>(b)], t, u),
                   col(r, idx(i, a, t), idx(i, b, u))) += 1.0;
              for (int m = 0; m < l; ++m)
                for (int i = 0; i < l; ++i)
                  for (int j = 0; j < l; ++j) {
                    Exponent al = low_[static_cast<std::size_t>(a)];
                    Exponent be = low_[static_cast<std::size_t>(b)];
                    al[static_cast<std::size_t>(s_.flat_index(r, m, i))] += 1;
                    be[static_cast<std::size_t>(s_.flat_index(r, m, j))] += 1;
                    L_(row(al, be, t, u), col(r, idx(i, a, t), idx(j, b, u))) -= 1.0;
                  }
            }
    }
    b_ = CVector::Zero(nrows_);
    for (const auto& al : high_) {
      const CMatrix Pa = P.coefficient(al), Qa = Q.coefficient(al);
      for (const auto& be : high_) {
        const CMatrix Pb = P.coefficient(be), Qb = Q.coefficient(be);
        const CMatrix v = Pa.adjoint() * Pb - Qa.adjoint() * Qb;
        for (int t = 0; t < out_; ++t)
          for (int u = 0; u < out_; ++u) b_(row(al, be, t, u)) = v(t, u);
      }
    }
  }

  int N() const { return static_cast<int>(low_.size()); }
  int out() const { return out_; }
  int side(int r) const { return side_[static_cast<std::size_t>(r)]; }
  int ncols() const { return ncols_; }
  const std::vector<Exponent>& low() const { return low_; }
  const CMatrix& L() const { return L_; }
  const CVector& b() const { return b_; }
  int idx(int i, int a, int t) const { return (i * N() + a) * out_ + t; }
  int col(int r, int row, int c) const {
    return col_off_[static_cast<std::size_t>(r)] + row * side(r) + c;
  }

  CVector vec(const std::vector<CMatrix>& M) const {
    CVector x(ncols_);
    for (int r = 0; r < s_.k(); ++r)
      for (int i = 0; i < side(r); ++i)
        for (int j = 0; j < side(r); ++j) x(col(r, i, j)) = M[static_cast<std::size_t>(r)](i, j);
    return x;
  }
  std::vector<CMatrix> unvec(const CVector& x) const {
    std::vector<CMatrix> M;
    for (int r = 0; r < s_.k(); ++r) {
      CMatrix m(side(r), side(r));
      for (int i = 0; i < side(r); ++i)
        for (int j = 0; j < side(r); ++j) m(i, j) = x(col(r, i, j));
      M.push_back(std::move(m));
    }
    return M;
  }
  CVector mismatch(const std::vector<CMatrix>& M) const { return L_ * vec(M) - b_; }

 private:
  int row(const Exponent& al, const Exponent& be, int t, int u) const {
    const int H = static_cast<int>(high_.size());
    return ((high_index_.at(al) * H + high_index_.at(be)) * out_ + t) * out_ + u;
  }

  BlockStructure s_;
  int out_ = 1, g_ = 0;
  std::vector<Exponent> low_, high_;
  std::map<Exponent, int, GrevlexLess> high_index_;
  std::vector<int> side_, col_off_;
  int ncols_ = 0, nrows_ = 0;
  CMatrix L_;
  CVector b_;
};

std::vector<CMatrix> gram_factors(const std::vector<CMatrix>& M, double rank_tol) {
  std::vector<CMatrix> Y;
  for (const auto& m : M) {
    if (m.size() == 0) {
      Y.emplace_back(0, 0);
      continue;
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m + m.adjoint()));
    const RVector& lam = es.eigenvalues();
    const double lmax = lam.maxCoeff();
    std::vector<int> keep;
    for (int k = static_cast<int>(lam.size()) - 1; k >= 0; --k)
      if (lmax > 1e-300 && lam(k) > rank_tol * lmax) keep.push_back(k);
    CMatrix y(static_cast<Eigen::Index>(keep.size()), m.rows());
    for (std::size_t q = 0; q < keep.size(); ++q)
      y.row(static_cast<Eigen::Index>(q)) =
          std::sqrt(lam(keep[q])) * es.eigenvectors().col(keep[q]).adjoint();
    Y.push_back(std::move(y));
  }
  return Y;
}

std::vector<CMatrix> grams_of(const std::vector<CMatrix>& Y, const GramSystem& sys) {
  std::vector<CMatrix> M;
  for (std::size_t r = 0; r < Y.size(); ++r) {
    const int side = sys.side(static_cast<int>(r));
    if (Y[r].rows() == 0)
      M.push_back(CMatrix::Zero(side, side));
    else
      M.push_back(Y[r].adjoint() * Y[r]);
  }
  return M;
}

// Gauss-Newton on the Gram factors; keeps every M_r PSD by construction.
std::vector<CMatrix> polish_factors(std::vector<CMatrix> Y, const GramSystem& sys, int max_steps) {
  const CMatrix& L = sys.L();
  auto residual_of = [&](const std::vector<CMatrix>& y) { return sys.mismatch(grams_of(y, sys)); };
  CVector res = residual_of(Y);
  double best = res.cwiseAbs().maxCoeff();
  int nparams = 0;
  for (const auto& y : Y) nparams += 2 * static_cast<int>(y.size());
  if (nparams == 0) return Y;
  const Eigen::Index R = L.rows();
  for (int step = 0; step < max_steps && best > 1e-14; ++step) {
    RMatrix J(2 * R, nparams);
    int p = 0;
    for (int r = 0; r < static_cast<int>(Y.size()); ++r) {
      const CMatrix& y = Y[static_cast<std::size_t>(r)];
      const int side = sys.side(r);
      for (Eigen::Index q = 0; q < y.cols(); ++q)
        for (Eigen::Index m = 0; m < y.rows(); ++m)
          for (int part = 0; part < 2; ++part) {
            const cplx delta = part == 0 ? cplx(1.0) : cplx(0.0, 1.0);
            // dM = E^* Y + Y^* E with E = delta e_m e_q^T.
            CVector jc = CVector::Zero(R);
            for (int c = 0; c < side; ++c) {
              jc += L.col(sys.col(r, static_cast<int>(q), c)) * (std::conj(delta) * y(m, c));
              jc += L.col(sys.col(r, c, static_cast<int>(q))) * (std::conj(y(m, c)) * delta);
            }
            J.col(p).head(R) = jc.real();
            J.col(p).tail(R) = jc.imag();
            ++p;
          }
    }
    RVector rv(2 * R);
    rv.head(R) = res.real();
    rv.tail(R) = res.imag();
    const RVector dx = J.completeOrthogonalDecomposition().solve(-rv);
    std::vector<CMatrix> trial = Y;
    p = 0;
    for (auto& y : trial)
      for (Eigen::Index q = 0; q < y.cols(); ++q)
        for (Eigen::Index m = 0; m < y.rows(); ++m) {
          y(m, q) += cplx(dx(p), dx(p + 1));
          p += 2;
        }
    const CVector tres = residual_of(trial);
    const double tbest = tres.cwiseAbs().maxCoeff();
    if (!(tbest < best)) break;
    Y = std::move(trial);
    res = tres;
    best = tbest;
  }
  return Y;
}

}  // namespace

GramCertificate GramCertificate::from_factors(const BlockStructure& s, int out, int g,
                                              std::vector<std::vector<CMatrix>> G) {
  GramCertificate c;
  c.structure = s;
  c.s = out;
  c.g = g;
  c.monomials = monomials_up_to(s.d(), g - 1);
  if (static_cast<int>(G.size()) != s.k()) throw StructureMismatch("need one factor family per block");
  const int N = static_cast<int>(c.monomials.size());
  for (int r = 0; r < s.k(); ++r) {
    auto& Gr = G[static_cast<std::size_t>(r)];
    if (static_cast<int>(Gr.size()) != N) throw StructureMismatch("factor family has wrong monomial count");
    const int l = s.ell(r);
    const Eigen::Index rows = N > 0 ? Gr[0].rows() : 0;
    if (rows % l != 0) throw StructureMismatch("factor rows must be a multiple of l_r");
    const int nr = static_cast<int>(rows / l);
    for (const auto& m : Gr)
      if (m.rows() != rows || m.cols() != out) throw StructureMismatch("factor coefficient has wrong shape");
    const int side = l * N * out;
    CMatrix Y = CMatrix::Zero(nr, side);
    for (int i = 0; i < l; ++i)
      for (int a = 0; a < N; ++a)
        for (int t = 0; t < out; ++t)
          for (int m = 0; m < nr; ++m) Y(m, (i * N + a) * out + t) = Gr[static_cast<std::size_t>(a)](i * nr + m, t);
    c.M.push_back(Y.adjoint() * Y);
    c.n.push_back(nr);
  }
  c.G = std::move(G);
  return c;
}

CMatrix GramCertificate::eval(const MatrixPoint& z) const {
  const CVector zc = z.coords();
  const int M = inflated_side(structure, n);
  CMatrix out = CMatrix::Zero(M, s);
  int off = 0;
  for (int r = 0; r < structure.k(); ++r) {
    const int rows = structure.ell(r) * n[static_cast<std::size_t>(r)];
    for (std::size_t a = 0; a < monomials.size(); ++a)
      if (rows > 0) out.block(off, 0, rows, s) += G[static_cast<std::size_t>(r)][a] * monomial_value(monomials[a], zc);
    off += rows;
  }
  return out;
}

long long GramCertificate::dimension_bound(int r) const {
  return static_cast<long long>(structure.ell(r)) * s * binomial(g + structure.d() - 1, structure.d());
}

namespace {

GramCertificate certificate_from_gram(const GramSystem& sys, const BlockStructure& s, int out, int g,
                                      const std::vector<CMatrix>& Y) {
  GramCertificate c;
  c.structure = s;
  c.s = out;
  c.g = g;
  c.monomials = sys.low();
  c.M = grams_of(Y, sys);
  const int N = sys.N();
  for (int r = 0; r < s.k(); ++r) {
    const CMatrix& y = Y[static_cast<std::size_t>(r)];
    const int nr = static_cast<int>(y.rows());
    const int l = s.ell(r);
    c.n.push_back(nr);
    std::vector<CMatrix> Gr;
    for (int a = 0; a < N; ++a) {
      CMatrix ga = CMatrix::Zero(l * nr, out);
      for (int i = 0; i < l; ++i)
        for (int t = 0; t < out; ++t)
          for (int m = 0; m < nr; ++m) ga(i * nr + m, t) = y(m, sys.idx(i, a, t));
      Gr.push_back(std::move(ga));
    }
    c.G.push_back(std::move(Gr));
  }
  c.residual = sys.mismatch(c.M).cwiseAbs().maxCoeff();
  return c;
}

void check_degrees(const MatPoly& P, const MatPoly& Q, int g) {
  if (g < 0) throw InvalidArgument("degree bound g must be >= 0");
  const auto dp = P.total_degree(), dq = Q.total_degree();
  if ((dp && *dp > g) || (dq && *dq > g))
    throw InvalidArgument("P and Q must have total degree at most g = " + std::to_string(g));
}

}  // namespace

GramResult gram_feasibility(const MatPoly& P, const MatPoly& Q, int g, const GramOptions& opt) {
  check_degrees(P, Q, g);
  const GramSystem sys(P, Q, g);
  const BlockStructure& s = P.structure();
  GramResult res;

  // Constraints no Gram entry can reach must already hold.
  const CMatrix& L = sys.L();
  std::vector<Eigen::Index> live;
  double dead_mismatch = 0.0;
  for (Eigen::Index i = 0; i < L.rows(); ++i) {
    if (L.row(i).cwiseAbs().maxCoeff() > 0.0)
      live.push_back(i);
    else
      dead_mismatch = std::max(dead_mismatch, std::abs(sys.b()(i)));
  }
  const double bscale = std::max(1.0, sys.b().cwiseAbs().maxCoeff());
  if (dead_mismatch > opt.tol * bscale) {
    res.best_residual = dead_mismatch;
    res.message = "coefficient of P^*P - Q^*Q outside the span of the decomposition; raise g";
    return res;
  }

  std::vector<CMatrix> Mbest;
  if (sys.ncols() > 0 && !live.empty()) {
    CMatrix Lr(static_cast<Eigen::Index>(live.size()), sys.ncols());
    CVector br(static_cast<Eigen::Index>(live.size()));
    for (std::size_t i = 0; i < live.size(); ++i) {
      Lr.row(static_cast<Eigen::Index>(i)) = L.row(live[i]);
      br(static_cast<Eigen::Index>(i)) = sys.b()(live[i]);
    }
    const CMatrix pinv = Lr.completeOrthogonalDecomposition().pseudoInverse();
    const CMatrix proj = CMatrix::Identity(sys.ncols(), sys.ncols()) - pinv * Lr;
    const CVector x0 = pinv * br;

    // Dykstra: the affine set needs no correction term, the PSD cone does.
    CVector y = x0;
    CVector q = CVector::Zero(sys.ncols());
    CVector z = y;
    double best = std::numeric_limits<double>::infinity();
    long it = 0;
    for (; it < opt.max_iters; ++it) {
      const CVector yq = y + q;
      auto blocks = sys.unvec(yq);
      for (auto& m : blocks) m = project_psd(m);
      z = sys.vec(blocks);
      q = yq - z;
      if (it % 10 == 0 || it + 1 == opt.max_iters) {
        const double r = (sys.L() * z - sys.b()).cwiseAbs().maxCoeff();
        if (r < best) {
          best = r;
          Mbest = blocks;
        }
        if (r < opt.tol) break;
      }
      y = proj * z + x0;
    }
    res.iterations = std::min(it + 1, opt.max_iters);
    res.best_residual = best;
  } else {
    for (int r = 0; r < s.k(); ++r) Mbest.push_back(CMatrix::Zero(sys.side(r), sys.side(r)));
    res.best_residual = sys.mismatch(Mbest).cwiseAbs().maxCoeff();
  }

  std::vector<CMatrix> Y = gram_factors(Mbest, opt.rank_tol);
  if (opt.polish && res.best_residual < 1e-2) Y = polish_factors(std::move(Y), sys, 30);
  GramCertificate cert = certificate_from_gram(sys, s, P.rows(), g, Y);
  cert.iterations = res.iterations;
  res.best_residual = cert.residual;
  if (cert.residual < opt.tol) {
    res.feasible = true;
    res.certificate = std::move(cert);
  } else {
    res.message = "projection stalled above tolerance";
  }
  return res;
}

double gram_coefficient_residual(const MatPoly& P, const MatPoly& Q, const GramCertificate& cert) {
  const GramSystem sys(P, Q, cert.g);
  return sys.mismatch(cert.M).cwiseAbs().maxCoeff();
}

double gram_coefficient_residual_l1(const MatPoly& P, const MatPoly& Q, const GramCertificate& cert) {
  const GramSystem sys(P, Q, cert.g);
  return sys.mismatch(cert.M).cwiseAbs().sum();
}

double gram_point_residual(const MatPoly& P, const MatPoly& Q, const GramCertificate& cert,
                           const MatrixPoint& z, const MatrixPoint& w) {
  const CMatrix Pz = eval_point(P, z), Pw = eval_point(P, w);
  const CMatrix Qz = eval_point(Q, z), Qw = eval_point(Q, w);
  CMatrix diff = Pw.adjoint() * Pz - Qw.adjoint() * Qz;
  const CMatrix Gz = cert.eval(z), Gw = cert.eval(w);
  int off = 0;
  const auto& s = cert.structure;
  for (int r = 0; r < s.k(); ++r) {
    const int nr = cert.n[static_cast<std::size_t>(r)];
    const int l = s.ell(r);
    if (nr == 0) continue;
    const CMatrix K = CMatrix::Identity(l, l) - w.block(r).adjoint() * z.block(r);
    diff -= Gw.middleRows(off, l * nr).adjoint() * kron(K, CMatrix::Identity(nr, nr)) *
            Gz.middleRows(off, l * nr);
    off += l * nr;
  }
  return spectral_norm(diff);
}

LurkingResult lurking_isometry(const MatPoly& P, const MatPoly& Q, const GramCertificate& cert,
                               std::uint64_t seed) {
  const auto& st = cert.structure;
  const int out = cert.s;
  if (P.structure() != st || Q.structure() != st) throw StructureMismatch("certificate structure differs");
  if (P.rows() != out || Q.rows() != out) throw StructureMismatch("certificate output size differs");
  const int M = inflated_side(st, cert.n);
  const int dim = M + out;
  const int m = 3 * dim;

  CMatrix X(dim, m * out), Y(dim, m * out);
  for (int j = 0; j < m; ++j) {
    const MatrixPoint z = sample_interior(st, derive_seed(seed, static_cast<std::uint64_t>(j)));
    const CMatrix Gz = cert.eval(z);
    if (M > 0) {
      X.block(0, j * out, M, out) = inflate(z, cert.n) * Gz;
      Y.block(0, j * out, M, out) = Gz;
    }
    X.block(M, j * out, out, out) = eval_point(P, z);
    Y.block(M, j * out, out, out) = eval_point(Q, z);
  }
  const CMatrix gx = X.adjoint() * X;
  const CMatrix gy = Y.adjoint() * Y;
  const double gram_defect = (gx - gy).cwiseAbs().maxCoeff() / std::max(1.0, gx.cwiseAbs().maxCoeff());
  if (gram_defect > 1e-7)
    throw InvalidCertificate("sampled Gram matrices disagree by " + std::to_string(gram_defect));

  Eigen::JacobiSVD<CMatrix> svd(X, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RVector& sv = svd.singularValues();
  int rank = 0;
  while (rank < sv.size() && sv(rank) > 1e-8 * sv(0)) ++rank;
  const CMatrix Ux = svd.matrixU().leftCols(rank);
  CMatrix W = Y * svd.matrixV().leftCols(rank);
  for (int k = 0; k < rank; ++k) W.col(k) /= sv(k);
  // Nearest isometry on the range, then deterministic completion.
  CMatrix Wiso(dim, rank);
  if (rank > 0) {
    Eigen::JacobiSVD<CMatrix> ws(W, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Wiso = ws.matrixU() * ws.matrixV().adjoint();
  }
  const CMatrix dom_c = orthogonal_complement(Ux, dim);
  const CMatrix cod_c = orthogonal_complement(Wiso, dim);
  CMatrix V = Wiso * Ux.adjoint() + cod_c * dom_c.adjoint();

  LurkingResult res{Colligation::from_system(st, cert.n, out, V), gram_defect, 0.0, m};
  for (int j = 0; j < 50; ++j) {
    const MatrixPoint z =
        sample_interior(st, derive_seed(seed ^ 0xA5A5A5A5ULL, static_cast<std::uint64_t>(j)));
    const CMatrix Pz = eval_point(P, z);
    if (condition_number(Pz) > 1e12) continue;
    const CMatrix target = eval_point(Q, z) * Pz.inverse();
    res.transfer_error = std::max(res.transfer_error, spectral_norm(eval_transfer(res.colligation, z) - target));
  }
  return res;
}

BoundaryReport boundary_gram_check(const MatPoly& P, const MatPoly& Q, int samples, std::uint64_t seed) {
  if (P.rows() != Q.rows() || P.cols() != Q.cols()) throw StructureMismatch("P and Q shapes differ");
  BoundaryReport rep;
  for (int i = 0; i < samples; ++i) {
    const MatrixPoint u = sample_shilov(P.structure(), derive_seed(seed, static_cast<std::uint64_t>(i)));
    const CMatrix Pu = eval_point(P, u), Qu = eval_point(Q, u);
    rep.max_defect = std::max(rep.max_defect, spectral_norm(Pu.adjoint() * Pu - Qu.adjoint() * Qu));
    ++rep.samples;
  }
  rep.pass = rep.max_defect < 1e-8;
  return rep;
}

SynthesisResult synthesize(const MatPoly& P, const MatPoly& Q, int g, const GramOptions& opt,
                           std::uint64_t seed) {
  SynthesisResult res;
  res.boundary = boundary_gram_check(P, Q, 200, seed);
  if (!res.boundary.pass) {
    res.verdict = "BoundaryFail";
    return res;
  }
  res.gram = gram_feasibility(P, Q, g, opt);
  if (!res.gram.feasible) {
    res.verdict = "Infeasible";
    return res;
  }
  res.realization = lurking_isometry(P, Q, *res.gram.certificate, seed);
  res.verdict = "Success";
  return res;
}

}  // namespace polyball
