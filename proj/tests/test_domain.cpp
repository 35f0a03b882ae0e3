#include <doctest.h>

#include "support.hpp"

using namespace polyball;
using namespace polyball::testing;

TEST_CASE("flat index is a bijection in block then row-major order") {
  const BlockStructure s({2, 1, 3});
  CHECK(s.k() == 3);
  CHECK(s.d() == 4 + 1 + 9);
  int expected = 0;
  for (int r = 0; r < s.k(); ++r)
    for (int i = 0; i < s.ell(r); ++i)
      for (int j = 0; j < s.ell(r); ++j) {
        const int v = s.flat_index(r, i, j);
        CHECK(v == expected++);
        const auto e = s.entry(v);
        CHECK(e.r == r);
        CHECK(e.i == i);
        CHECK(e.j == j);
        CHECK(s.variable_index(s.variable_name(v)) == v);
      }
  CHECK(s.variable_name(0) == "z1_11");
  CHECK(s.variable_name(1) == "z1_12");
  CHECK(s.variable_name(4) == "z2_11");
  CHECK(s.variable_index("z4_11") == -1);
}

TEST_CASE("invalid structures are rejected") {
  CHECK_THROWS_AS(BlockStructure(std::vector<int>{}), InvalidArgument);
  CHECK_THROWS_AS(BlockStructure({1, 0}), InvalidArgument);
}

TEST_CASE("point classification") {
  const BlockStructure s({2});
  CHECK(MatrixPoint(s, {CMatrix::Identity(2, 2) * 0.5}).classify() == PointClass::Interior);
  CHECK(MatrixPoint(s, {CMatrix::Identity(2, 2)}).classify() == PointClass::Shilov);
  CMatrix b = CMatrix::Identity(2, 2);
  b(1, 1) = 0.3;
  CHECK(MatrixPoint(s, {b}).classify() == PointClass::BoundaryOther);
  CHECK(MatrixPoint(s, {CMatrix::Identity(2, 2) * 1.5}).classify() == PointClass::Exterior);
  CHECK_THROWS_AS(MatrixPoint(s, {CMatrix::Identity(3, 3)}), StructureMismatch);
}

TEST_CASE("inflate examples") {
  const BlockStructure s1({1});
  const CMatrix z3 = inflate(MatrixPoint(s1, {CMatrix::Constant(1, 1, 0.5)}), {3});
  CHECK(max_abs_diff(z3, CMatrix::Identity(3, 3) * 0.5) == 0.0);

  const BlockStructure s2({1, 1});
  const MatrixPoint z(s2, {CMatrix::Constant(1, 1, cplx(0.2, 0.1)), CMatrix::Constant(1, 1, -0.4)});
  const CMatrix d = inflate(z, {1, 1});
  CHECK(d.rows() == 2);
  CHECK(d(0, 0) == cplx(0.2, 0.1));
  CHECK(d(1, 1) == cplx(-0.4));
  CHECK(d(0, 1) == cplx(0.0));
  CHECK(inflate(z, {0, 0}).size() == 0);
}

TEST_CASE("inflate matches direct sums of Kronecker products") {
  const BlockStructure s({2, 1, 3});
  const std::vector<int> n{2, 0, 3};
  const MatrixPoint z = sample_interior(s, 11);
  const CMatrix zn = inflate(z, n);
  CHECK(zn.rows() == inflated_side(s, n));
  CMatrix expect = CMatrix::Zero(2 * 2 + 3 * 3, 2 * 2 + 3 * 3);
  expect.block(0, 0, 4, 4) = kron_oracle(z.block(0), CMatrix::Identity(2, 2));
  expect.block(4, 4, 9, 9) = kron_oracle(z.block(2), CMatrix::Identity(3, 3));
  CHECK(max_abs_diff(zn, expect) == 0.0);
}

TEST_CASE("inflate is linear and maps Shilov points to unitaries") {
  const BlockStructure s({2, 1});
  const std::vector<int> n{2, 3};
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    const MatrixPoint a = sample_interior(s, derive_seed(1, i)), b = sample_interior(s, derive_seed(2, i));
    const cplx x(0.3, -1.2), y(-0.7, 0.4);
    const CMatrix lhs = inflate(a.scaled(x) + b.scaled(y), n);
    const CMatrix rhs = x * inflate(a, n) + y * inflate(b, n);
    CHECK(max_abs_diff(lhs, rhs) < 1e-12);
    const CMatrix u = inflate(sample_shilov(s, derive_seed(3, i)), n);
    CHECK(unitarity_defect(u) < 1e-11);
  }
}

TEST_CASE("tuple inflation at N = 1 equals point inflation") {
  const BlockStructure s({2, 1});
  const CommutingTuple t = sample_commuting_tuple(s, 1, TupleFamily::Diagonalizable, 4);
  CHECK(max_abs_diff(inflate(t, {1, 2}), inflate(t.as_point(), {1, 2})) == 0.0);
  CHECK(t.as_point().classify() == PointClass::Interior);
}

TEST_CASE("tuple inflation replaces scalars by N x N blocks") {
  const BlockStructure s({2});
  const CommutingTuple t = sample_commuting_tuple(s, 3, TupleFamily::SingleGenerator, 9);
  const CMatrix zn = inflate(t, {2});
  // kron(Z, I_2) with each scalar replaced by its matrix.
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int m = 0; m < 2; ++m)
        for (int mm = 0; mm < 2; ++mm) {
          const CMatrix blk = zn.block((i * 2 + m) * 3, (j * 2 + mm) * 3, 3, 3);
          if (m == mm)
            CHECK(max_abs_diff(blk, t.mat(s.flat_index(0, i, j))) == 0.0);
          else
            CHECK(blk.cwiseAbs().maxCoeff() == 0.0);
        }
}

TEST_CASE("Shilov samples are unitary and reproducible") {
  const BlockStructure s({1, 2, 3});
  for (int i = 0; i < 10; ++i) {
    const MatrixPoint u = sample_shilov(s, i);
    CHECK(std::abs(std::abs(u.block(0)(0, 0)) - 1.0) <= 1e-12);
    for (int r = 0; r < s.k(); ++r) CHECK(unitarity_defect(u.block(r)) <= 1e-12);
    CHECK(u.classify() == PointClass::Shilov);
  }
  const MatrixPoint a = sample_shilov(s, 42), b = sample_shilov(s, 42);
  for (int r = 0; r < s.k(); ++r) CHECK((a.block(r).array() == b.block(r).array()).all());
}

TEST_CASE("interior samples stay inside") {
  const BlockStructure s({2});
  for (int i = 0; i < 50; ++i) {
    const MatrixPoint z = sample_interior(s, i);
    CHECK(z.block(0).rows() == 2);
    CHECK(z.max_block_norm() < 1.0);
    CHECK(z.classify() == PointClass::Interior);
  }
  const MatrixPoint a = sample_interior(s, 7), b = sample_interior(s, 7);
  CHECK((a.block(0).array() == b.block(0).array()).all());
}

TEST_CASE("Haar smoke test: E|u11|^2 = 1/2 for 2 x 2 unitaries") {
  const BlockStructure s({2});
  double acc = 0.0;
  const int count = 10000;
  for (int i = 0; i < count; ++i) acc += std::norm(sample_shilov(s, derive_seed(77, i)).block(0)(0, 0));
  CHECK(std::abs(acc / count - 0.5) < 0.02);
}

TEST_CASE("commuting tuples commute, contract and reproduce") {
  const BlockStructure s({2, 1});
  for (auto fam : {TupleFamily::Diagonalizable, TupleFamily::SingleGenerator})
    for (int N = 1; N <= 6; ++N) {
      const CommutingTuple t = sample_commuting_tuple(s, N, fam, derive_seed(N, fam == TupleFamily::Diagonalizable));
      CHECK(t.N() == N);
      for (int a = 0; a < s.d(); ++a)
        for (int b = 0; b < s.d(); ++b) {
          const CMatrix c = t.mat(a) * t.mat(b) - t.mat(b) * t.mat(a);
          CHECK(spectral_norm(c) <= 1e-10 * std::max(1.0, spectral_norm(t.mat(a)) * spectral_norm(t.mat(b))));
        }
      for (int r = 0; r < s.k(); ++r) CHECK(spectral_norm(t.operator_block(r)) <= 1.0 - 1e-3 + 1e-12);
      const CommutingTuple u = sample_commuting_tuple(s, N, fam, derive_seed(N, fam == TupleFamily::Diagonalizable));
      for (int v = 0; v < s.d(); ++v) CHECK((t.mat(v).array() == u.mat(v).array()).all());
    }
}

TEST_CASE("commuting tuple constructor enforces its invariants") {
  const BlockStructure s({1, 1});
  CMatrix a = CMatrix::Zero(2, 2), b = CMatrix::Zero(2, 2);
  a(0, 1) = 0.5;
  b(1, 0) = 0.5;
  CHECK_THROWS_AS(CommutingTuple(s, 2, {a, b}), InvalidArgument);
  CHECK_THROWS_AS(CommutingTuple(s, 2, {CMatrix::Identity(2, 2), CMatrix::Zero(2, 2)}), InvalidArgument);
  CHECK_NOTHROW(CommutingTuple(s, 2, {a, a * 0.5}));
}
