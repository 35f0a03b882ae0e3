#include "polyball/mpoly.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace polyball {

bool GrevlexLess::operator()(const Exponent& a, const Exponent& b) const {
  const int da = total_degree(a);
  const int db = total_degree(b);
  if (da != db) return da < db;
  for (std::size_t v = a.size(); v-- > 0;)
    if (a[v] != b[v]) return a[v] > b[v];
  return false;
}

int total_degree(const Exponent& e) {
  int s = 0;
  for (auto x : e) s += x;
  return s;
}

MPoly::MPoly(BlockStructure structure) : structure_(std::move(structure)) {}

MPoly MPoly::constant(const BlockStructure& s, cplx c) {
  MPoly p(s);
  p.set_term(Exponent(static_cast<std::size_t>(s.d()), 0), c);
  return p.normalize();
}

MPoly MPoly::variable(const BlockStructure& s, int v, cplx c) {
  if (v < 0 || v >= s.d()) throw IndexOutOfRange("variable index out of range");
  Exponent e(static_cast<std::size_t>(s.d()), 0);
  e[static_cast<std::size_t>(v)] = 1;
  return monomial(s, std::move(e), c);
}

MPoly MPoly::monomial(const BlockStructure& s, Exponent e, cplx c) {
  if (static_cast<int>(e.size()) != s.d()) throw StructureMismatch("exponent has wrong length");
  MPoly p(s);
  p.set_term(e, c);
  return p.normalize();
}

cplx MPoly::coeff(const Exponent& e) const {
  auto it = terms_.find(e);
  return it == terms_.end() ? cplx(0.0) : it->second;
}

void MPoly::add_term(const Exponent& e, cplx c) { terms_[e] += c; }

void MPoly::set_term(const Exponent& e, cplx c) {
  if (static_cast<int>(e.size()) != structure_.d()) throw StructureMismatch("exponent has wrong length");
  terms_[e] = c;
}

MPoly& MPoly::normalize(double drop_tol) {
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (std::abs(it->second) < drop_tol)
      it = terms_.erase(it);
    else
      ++it;
  }
  return *this;
}

namespace {

int block_part(const BlockStructure& s, const Exponent& e, int r) {
  const int off = s.block_offset(r);
  const int l = s.ell(r);
  int sum = 0;
  for (int v = off; v < off + l * l; ++v) sum += e[static_cast<std::size_t>(v)];
  return sum;
}

}  // namespace

std::optional<int> MPoly::block_degree(int r) const {
  if (terms_.empty()) return std::nullopt;
  int m = 0;
  for (const auto& [e, c] : terms_) m = std::max(m, block_part(structure_, e, r));
  return m;
}

std::optional<int> MPoly::min_block_degree(int r) const {
  if (terms_.empty()) return std::nullopt;
  int m = std::numeric_limits<int>::max();
  for (const auto& [e, c] : terms_) m = std::min(m, block_part(structure_, e, r));
  return m;
}

std::optional<int> MPoly::total_degree() const {
  if (terms_.empty()) return std::nullopt;
  return polyball::total_degree(terms_.rbegin()->first);
}

DegreeVector MPoly::degrees() const {
  if (terms_.empty()) throw InvalidArgument("the zero polynomial has degree -infinity");
  DegreeVector t;
  for (int r = 0; r < structure_.k(); ++r) t.push_back(*block_degree(r));
  return t;
}

std::pair<Exponent, cplx> MPoly::leading_term() const {
  if (terms_.empty()) throw InvalidArgument("the zero polynomial has no leading term");
  return *terms_.rbegin();
}

double MPoly::coeff_norm() const {
  double s = 0.0;
  for (const auto& [e, c] : terms_) s += std::norm(c);
  return std::sqrt(s);
}

double MPoly::max_abs_coeff() const {
  double m = 0.0;
  for (const auto& [e, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

void MPoly::require_same(const MPoly& o) const {
  if (o.structure_ != structure_) throw StructureMismatch("polynomials over different block structures");
}

MPoly MPoly::operator+(const MPoly& o) const {
  require_same(o);
  MPoly r = *this;
  for (const auto& [e, c] : o.terms_) r.terms_[e] += c;
  return r.normalize();
}

MPoly MPoly::operator-(const MPoly& o) const {
  require_same(o);
  MPoly r = *this;
  for (const auto& [e, c] : o.terms_) r.terms_[e] -= c;
  return r.normalize();
}

MPoly MPoly::operator*(const MPoly& o) const {
  require_same(o);
  MPoly r(structure_);
  Exponent e(static_cast<std::size_t>(structure_.d()));
  for (const auto& [ea, ca] : terms_)
    for (const auto& [eb, cb] : o.terms_) {
      for (std::size_t v = 0; v < e.size(); ++v) e[v] = static_cast<std::uint16_t>(ea[v] + eb[v]);
      r.terms_[e] += ca * cb;
    }
  return r.normalize();
}

MPoly MPoly::operator*(cplx c) const {
  MPoly r = *this;
  for (auto& [e, x] : r.terms_) x *= c;
  return r.normalize();
}

MPoly MPoly::pow(int e) const {
  if (e < 0) throw InvalidArgument("negative polynomial power");
  MPoly result = constant(structure_, 1.0);
  MPoly base = *this;
  while (e > 0) {
    if (e & 1) result = result * base;
    e >>= 1;
    if (e > 0) base = base * base;
  }
  return result;
}

MPoly MPoly::conj() const {
  MPoly r = *this;
  for (auto& [e, x] : r.terms_) x = std::conj(x);
  return r;
}

double MPoly::distance(const MPoly& o) const {
  require_same(o);
  double m = 0.0;
  for (const auto& [e, c] : terms_) m = std::max(m, std::abs(c - o.coeff(e)));
  for (const auto& [e, c] : o.terms_)
    if (!terms_.count(e)) m = std::max(m, std::abs(c));
  return m;
}

// ---------------------------------------------------------------------------

MatPoly::MatPoly(BlockStructure structure, int rows, int cols)
    : structure_(std::move(structure)), rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) throw InvalidArgument("negative matrix polynomial shape");
  entries_.assign(static_cast<std::size_t>(rows * cols), MPoly(structure_));
}

MatPoly MatPoly::scalar(const MPoly& p) {
  MatPoly m(p.structure(), 1, 1);
  m(0, 0) = p;
  return m;
}

MatPoly MatPoly::identity(const BlockStructure& s, int n) {
  MatPoly m(s, n, n);
  for (int i = 0; i < n; ++i) m(i, i) = MPoly::constant(s, 1.0);
  return m;
}

const MPoly& MatPoly::operator()(int i, int j) const {
  if (i < 0 || i >= rows_ || j < 0 || j >= cols_) throw IndexOutOfRange("matrix polynomial index");
  return entries_[static_cast<std::size_t>(i * cols_ + j)];
}

MPoly& MatPoly::operator()(int i, int j) {
  if (i < 0 || i >= rows_ || j < 0 || j >= cols_) throw IndexOutOfRange("matrix polynomial index");
  return entries_[static_cast<std::size_t>(i * cols_ + j)];
}

std::optional<int> MatPoly::total_degree() const {
  std::optional<int> m;
  for (const auto& p : entries_) {
    auto d = p.total_degree();
    if (d && (!m || *d > *m)) m = d;
  }
  return m;
}

CMatrix MatPoly::coefficient(const Exponent& e) const {
  CMatrix c(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) c(i, j) = (*this)(i, j).coeff(e);
  return c;
}

// ---------------------------------------------------------------------------

cplx eval_point(const MPoly& p, const MatrixPoint& z) {
  if (p.structure() != z.structure()) throw StructureMismatch("point and polynomial structures differ");
  const int d = p.structure().d();
  std::vector<std::vector<cplx>> pw(static_cast<std::size_t>(d), std::vector<cplx>{cplx(1.0)});
  cplx sum = 0.0;
  for (const auto& [e, c] : p.terms()) {
    cplx term = c;
    for (int v = 0; v < d; ++v) {
      const auto a = e[static_cast<std::size_t>(v)];
      if (a == 0) continue;
      auto& cache = pw[static_cast<std::size_t>(v)];
      while (cache.size() <= a) cache.push_back(cache.back() * z.coord(v));
      term *= cache[a];
    }
    sum += term;
  }
  return sum;
}

CMatrix eval_tuple(const MPoly& p, const CommutingTuple& t) {
  if (p.structure() != t.structure()) throw StructureMismatch("tuple and polynomial structures differ");
  if (t.N() == 1) return CMatrix::Constant(1, 1, eval_point(p, t.as_point()));
  const int d = p.structure().d();
  const int N = t.N();
  std::vector<std::vector<CMatrix>> pw(static_cast<std::size_t>(d),
                                       std::vector<CMatrix>{CMatrix::Identity(N, N)});
  CMatrix sum = CMatrix::Zero(N, N);
  for (const auto& [e, c] : p.terms()) {
    CMatrix term = CMatrix::Identity(N, N) * c;
    for (int v = 0; v < d; ++v) {
      const auto a = e[static_cast<std::size_t>(v)];
      if (a == 0) continue;
      auto& cache = pw[static_cast<std::size_t>(v)];
      while (cache.size() <= a) cache.push_back(cache.back() * t.mat(v));
      term = term * cache[a];
    }
    sum += term;
  }
  return sum;
}

CMatrix eval_point(const MatPoly& p, const MatrixPoint& z) {
  CMatrix out(p.rows(), p.cols());
  for (int i = 0; i < p.rows(); ++i)
    for (int j = 0; j < p.cols(); ++j) out(i, j) = eval_point(p(i, j), z);
  return out;
}

CMatrix eval_tuple(const MatPoly& p, const CommutingTuple& t) {
  const int N = t.N();
  CMatrix out(p.rows() * N, p.cols() * N);
  for (int i = 0; i < p.rows(); ++i)
    for (int j = 0; j < p.cols(); ++j) out.block(i * N, j * N, N, N) = eval_tuple(p(i, j), t);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

MPoly leibniz(const BlockStructure& s, int r, const std::vector<int>& rows,
              const std::vector<int>& cols) {
  const std::size_t m = rows.size();
  MPoly out(s);
  if (m == 0) return MPoly::constant(s, 1.0);
  std::vector<int> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    int inversions = 0;
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a + 1; b < m; ++b)
        if (perm[a] > perm[b]) ++inversions;
    Exponent e(static_cast<std::size_t>(s.d()), 0);
    for (std::size_t a = 0; a < m; ++a)
      e[static_cast<std::size_t>(s.flat_index(r, rows[a], cols[static_cast<std::size_t>(perm[a])]))] += 1;
    out.add_term(e, inversions % 2 == 0 ? 1.0 : -1.0);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out.normalize();
}

}  // namespace

MPoly det_poly(const BlockStructure& s, int r) {
  if (r < 0 || r >= s.k()) throw IndexOutOfRange("block index out of range");
  std::vector<int> idx(static_cast<std::size_t>(s.ell(r)));
  std::iota(idx.begin(), idx.end(), 0);
  return leibniz(s, r, idx, idx);
}

MPoly cofactor_poly(const BlockStructure& s, int r, int i, int j) {
  if (r < 0 || r >= s.k()) throw IndexOutOfRange("block index out of range");
  const int l = s.ell(r);
  if (i < 0 || i >= l || j < 0 || j >= l) throw IndexOutOfRange("cofactor index out of range");
  std::vector<int> rows, cols;
  for (int a = 0; a < l; ++a) {
    if (a != i) rows.push_back(a);
    if (a != j) cols.push_back(a);
  }
  MPoly minor = leibniz(s, r, rows, cols);
  return (i + j) % 2 == 0 ? minor : -minor;
}

MPoly det_power_product(const BlockStructure& s, const std::vector<int>& m) {
  if (static_cast<int>(m.size()) != s.k()) throw StructureMismatch("exponent list has wrong length");
  MPoly out = MPoly::constant(s, 1.0);
  for (int r = 0; r < s.k(); ++r) {
    if (m[static_cast<std::size_t>(r)] < 0) throw InvalidArgument("negative det power");
    if (m[static_cast<std::size_t>(r)] > 0) out = out * det_poly(s, r).pow(m[static_cast<std::size_t>(r)]);
  }
  return out;
}

namespace {

// Lazily filled power tables for cofactor and det substitutions.
class SubstitutionCache {
 public:
  explicit SubstitutionCache(const BlockStructure& s) : s_(s) {
    for (int v = 0; v < s.d(); ++v) {
      const auto e = s.entry(v);
      cof_.push_back({MPoly::constant(s, 1.0), cofactor_poly(s, e.r, e.i, e.j)});
    }
    for (int r = 0; r < s.k(); ++r) det_.push_back({MPoly::constant(s, 1.0), det_poly(s, r)});
  }
  const MPoly& cof(int v, int e) { return power(cof_[static_cast<std::size_t>(v)], e); }
  const MPoly& det(int r, int e) { return power(det_[static_cast<std::size_t>(r)], e); }

 private:
  static const MPoly& power(std::vector<MPoly>& table, int e) {
    while (static_cast<int>(table.size()) <= e) table.push_back(table.back() * table[1]);
    return table[static_cast<std::size_t>(e)];
  }
  BlockStructure s_;
  std::vector<std::vector<MPoly>> cof_;
  std::vector<std::vector<MPoly>> det_;
};

}  // namespace

MPoly reverse(const MPoly& p, const DegreeVector& t) {
  const auto& s = p.structure();
  if (static_cast<int>(t.size()) != s.k()) throw StructureMismatch("degree vector has wrong length");
  for (int x : t)
    if (x < 0) throw InvalidArgument("reverse degrees must be nonnegative");
  if (p.is_zero()) return p;

  // Clear the det denominators of terms whose block degree exceeds t_r.
  std::vector<int> excess(static_cast<std::size_t>(s.k()), 0);
  for (int r = 0; r < s.k(); ++r)
    excess[static_cast<std::size_t>(r)] = std::max(0, *p.block_degree(r) - t[static_cast<std::size_t>(r)]);

  SubstitutionCache cache(s);
  MPoly acc(s);
  for (const auto& [e, c] : p.terms()) {
    MPoly term = MPoly::constant(s, std::conj(c));
    for (int v = 0; v < s.d(); ++v) {
      const int a = e[static_cast<std::size_t>(v)];
      if (a > 0) term = term * cache.cof(v, a);
    }
    for (int r = 0; r < s.k(); ++r) {
      const int a = block_part(s, e, r);
      const int pw = t[static_cast<std::size_t>(r)] - a + excess[static_cast<std::size_t>(r)];
      if (pw > 0) term = term * cache.det(r, pw);
    }
    for (const auto& [te, tc] : term.terms()) acc.add_term(te, tc);
  }
  acc.normalize();

  for (int r = 0; r < s.k(); ++r) {
    const MPoly det = det_poly(s, r);
    for (int x = 0; x < excess[static_cast<std::size_t>(r)]; ++x) {
      auto div = exact_divide(acc, det);
      if (!div.divisible)
        throw InvalidArgument("reverse degree t_" + std::to_string(r + 1) +
                              " is below the reverse degree of the polynomial");
      acc = std::move(div.quotient);
    }
  }
  return acc;
}

MPoly reverse(const MPoly& p) {
  if (p.is_zero()) return p;
  return reverse(p, p.degrees());
}

ReducedReverse reduced_reverse(const MPoly& p) {
  const auto& s = p.structure();
  if (p.is_zero()) return {DegreeVector(static_cast<std::size_t>(s.k()), 0), p};
  DegreeVector t = p.degrees();
  auto f = factor_det_powers(reverse(p, t));
  for (int r = 0; r < s.k(); ++r) t[static_cast<std::size_t>(r)] -= f.m[static_cast<std::size_t>(r)];
  return {t, std::move(f.core)};
}

DivisionResult exact_divide(const MPoly& f, const MPoly& g, double tol) {
  if (f.structure() != g.structure()) throw StructureMismatch("division over different structures");
  if (g.is_zero()) throw InvalidArgument("division by the zero polynomial");
  const auto& s = f.structure();
  const auto [lt, lc] = g.leading_term();
  const double noise = 1e-13 * f.max_abs_coeff();

  MPoly::TermMap work = f.terms();
  MPoly q(s), rem(s);
  Exponent m(static_cast<std::size_t>(s.d()));
  Exponent prod(static_cast<std::size_t>(s.d()));
  while (!work.empty()) {
    auto it = std::prev(work.end());
    const Exponent e = it->first;
    const cplx c = it->second;
    work.erase(it);
    if (std::abs(c) <= noise) {
      rem.add_term(e, c);
      continue;
    }
    bool divides = true;
    for (std::size_t v = 0; v < e.size(); ++v) {
      if (e[v] < lt[v]) {
        divides = false;
        break;
      }
      m[v] = static_cast<std::uint16_t>(e[v] - lt[v]);
    }
    if (!divides) {
      rem.add_term(e, c);
      continue;
    }
    const cplx factor = c / lc;
    q.add_term(m, factor);
    for (const auto& [ge, gc] : g.terms()) {
      if (ge == lt) continue;
      for (std::size_t v = 0; v < ge.size(); ++v) prod[v] = static_cast<std::uint16_t>(m[v] + ge[v]);
      work[prod] -= factor * gc;
    }
  }
  q.normalize();
  rem.normalize();

  DivisionResult out{false, q, rem, 0.0};
  const double fn = f.coeff_norm();
  const double rn = (f - g * q).coeff_norm();
  out.residual = fn > 0.0 ? rn / fn : rn;
  out.divisible = out.residual <= tol;
  return out;
}

SelfReversiveResult is_almost_self_reversive(const MPoly& v, const DegreeVector& t, double tol) {
  SelfReversiveResult out;
  if (v.is_zero()) return out;
  const MPoly r = reverse(v, t);
  cplx num = 0.0;
  double den = 0.0;
  for (const auto& [e, c] : v.terms()) {
    num += std::conj(c) * r.coeff(e);
    den += std::norm(c);
  }
  const cplx gamma = num / den;
  out.residual = (r - v * gamma).coeff_norm() / std::sqrt(den);
  out.holds = out.residual <= tol && std::abs(std::abs(gamma) - 1.0) <= tol;
  if (out.holds) out.gamma = gamma;
  return out;
}

DetPowerFactorization factor_det_powers(const MPoly& p, double tol) {
  if (p.is_zero()) throw InvalidArgument("factor_det_powers of the zero polynomial");
  const auto& s = p.structure();
  DetPowerFactorization out{std::vector<int>(static_cast<std::size_t>(s.k()), 0), p};
  for (int r = 0; r < s.k(); ++r) {
    const MPoly det = det_poly(s, r);
    const int l = s.ell(r);
    while (*out.core.block_degree(r) >= l) {
      auto div = exact_divide(out.core, det, tol);
      if (!div.divisible) break;
      out.core = std::move(div.quotient);
      ++out.m[static_cast<std::size_t>(r)];
    }
  }
  return out;
}

}  // namespace polyball
