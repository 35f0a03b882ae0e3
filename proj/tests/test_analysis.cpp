#include <doctest.h>

#include "support.hpp"

using namespace polyball;
using namespace polyball::testing;

namespace {

const BlockStructure kBidisk({1, 1});
const BlockStructure kBall2({2});

MatPoly scalar(const MPoly& p) { return MatPoly::scalar(p); }

}  // namespace

TEST_CASE("check_inner examples") {
  CHECK(check_inner(det_poly(kBall2, 0), MPoly::constant(kBall2, 1.0)).pass());
  const MPoly p = bidisk_p(2.0);
  const InnerReport rp = check_inner(reverse(p), p);
  CHECK(rp.pass());
  CHECK(rp.samples == 200);
  const InnerReport bad =
      check_inner(MPoly::variable(kBidisk, 0) + MPoly::variable(kBidisk, 1), MPoly::constant(kBidisk, 2.0));
  CHECK(bad.verdict == "Fail");
  CHECK(bad.max_defect > 0.1);
}

TEST_CASE("check_inner is inconclusive when every sample is singular") {
  const BlockStructure s1({1});
  const InnerReport r = check_inner(MPoly::constant(s1, 1.0), MPoly::constant(s1, 1e-12), 20);
  CHECK(r.verdict == "Inconclusive");
  CHECK(r.near_singular == 20);
  CHECK(r.near_singular_fraction == 1.0);
}

TEST_CASE("rudin_factorize examples") {
  const RudinResult d = rudin_factorize(det_poly(kBall2, 0), MPoly::constant(kBall2, 1.0));
  REQUIRE(d.ok);
  CHECK(d.m == std::vector<int>{1});

  const MPoly p = bidisk_p(2.0);
  const MPoly z1 = MPoly::variable(kBidisk, 0), z2 = MPoly::variable(kBidisk, 1);
  const RudinResult b = rudin_factorize(z1 * z2 * 2.0 - z1 - z2, p);
  REQUIRE(b.ok);
  CHECK(b.m == std::vector<int>{0, 0});
  CHECK(std::abs(b.gamma - cplx(1.0)) < 1e-12);

  const RudinResult n = rudin_factorize(MPoly::variable(kBall2, 0), MPoly::constant(kBall2, 1.0));
  CHECK_FALSE(n.ok);
  CHECK(n.residual > 1e-9);
}

TEST_CASE("factorization consistency for stable denominators") {
  Rng rng(31);
  const std::vector<BlockStructure> structs = {BlockStructure({1, 1}), BlockStructure({2}), BlockStructure({2, 1})};
  for (int t = 0; t < 50; ++t) {
    const BlockStructure& s = structs[static_cast<std::size_t>(t) % structs.size()];
    const MPoly p = random_strongly_stable(s, 2, 4, 0.6, rng);
    std::vector<int> m;
    for (int r = 0; r < s.k(); ++r) m.push_back(static_cast<int>(rng() % 3));
    const MPoly q = det_power_product(s, m) * reduced_reverse(p).poly;
    const InnerReport ir = check_inner(q, p, 50, t);
    CHECK(ir.pass());
    const RudinResult rr = rudin_factorize(q, p);
    REQUIRE(rr.ok);
    CHECK(rr.m == m);
  }
}

TEST_CASE("stability examples") {
  StabilityOptions opt;
  opt.budget = 2000;
  const MPoly p2 = bidisk_p(2.0);
  const StabilityReport open = stability_scan(p2, StabilityMode::Open, opt, 1);
  CHECK(open.verdict == "NoZeroFound");
  CHECK(open.min_abs > 0.0);
  CHECK(open.radius < 1.0);

  const StabilityReport closed = stability_scan(p2, StabilityMode::Closed, opt, 1);
  REQUIRE(closed.zero_found());
  CHECK(closed.min_abs < 1e-8);
  REQUIRE(closed.argmin);
  CHECK(std::abs(closed.argmin->coord(0) - cplx(1.0)) < 1e-3);
  CHECK(std::abs(closed.argmin->coord(1) - cplx(1.0)) < 1e-3);

  const StabilityReport p3 = stability_scan(bidisk_p(3.0), StabilityMode::Closed, opt, 1);
  CHECK(p3.verdict == "NoZeroFound");
  CHECK(p3.min_abs >= 1.0 - 1e-9);
  CHECK(p3.min_abs < 1.0 + 1e-4);

  const StabilityReport dz =
      stability_scan(det_poly(kBall2, 0) - MPoly::constant(kBall2, 0.5), StabilityMode::Open, opt, 1);
  REQUIRE(dz.zero_found());
  CHECK(dz.argmin->max_block_norm() < 1.0);
  CHECK(std::abs(eval_point(det_poly(kBall2, 0), *dz.argmin) - cplx(0.5)) < 1e-8);
}

TEST_CASE("stability scans are deterministic across thread counts") {
  StabilityOptions one, four;
  one.budget = four.budget = 300;
  four.threads = 4;
  const MPoly p = bidisk_p(2.5);
  const StabilityReport a = stability_scan(p, StabilityMode::Closed, one, 9);
  const StabilityReport b = stability_scan(p, StabilityMode::Closed, four, 9);
  CHECK(a.min_abs == b.min_abs);
  CHECK(a.verdict == b.verdict);
}

TEST_CASE("Agler bound examples") {
  const MatPoly one = MatPoly::identity(kBidisk, 1);
  const AglerBoundReport z1 = agler_lower_bound(scalar(MPoly::variable(kBidisk, 0)), one, 40, 4, 2);
  CHECK(z1.verdict == "Bound");
  CHECK(z1.bound > 1.0 - 1e-3);
  CHECK(z1.bound <= 1.0);

  const cplx c(0.3, -0.4);
  const AglerBoundReport k = agler_lower_bound(scalar(MPoly::constant(kBidisk, c)), one, 10, 3, 2);
  CHECK(std::abs(k.bound - std::abs(c)) < 1e-15);

  const MPoly p = bidisk_p(2.0);
  const SynthesisResult syn = synthesize(scalar(p), scalar(reverse(p)), 2);
  REQUIRE(syn.success());
  const AglerBoundReport u = agler_lower_bound(scalar(reverse(p)), scalar(p), 100, 5, 3);
  CHECK(u.bound <= 1.0 + 1e-8);
  REQUIRE(u.witness);
  const double via_colligation = spectral_norm(eval_transfer(syn.realization->colligation, *u.witness));
  CHECK(std::abs(via_colligation - u.bound) < 1e-6);
}

TEST_CASE("Agler bound witnesses reproduce the bound") {
  const MPoly p = bidisk_p(2.5);
  const MatPoly Q = scalar(reduced_reverse(p).poly * MPoly::variable(kBidisk, 0)), P = scalar(p);
  const AglerBoundReport r = agler_lower_bound(Q, P, 30, 5, 7, 2);
  REQUIRE(r.witness);
  CHECK(std::abs(agler_value(Q, P, *r.witness) - r.bound) <= 1e-10);
  CHECK(r.witness_N == r.witness->N());
  CHECK(r.tried == 150);
}

TEST_CASE("Agler bound is monotone in tuples and N_max") {
  const MatPoly Q = scalar(MPoly::variable(kBidisk, 0) * MPoly::variable(kBidisk, 1) * 0.5 + MPoly::variable(kBidisk, 0) * 0.5);
  const MatPoly P = MatPoly::identity(kBidisk, 1);
  double prev = 0.0;
  for (int tuples : {5, 10, 20})
    for (int N : {1, 2, 4}) {
      const double b = agler_lower_bound(Q, P, tuples, N, 11).bound;
      CHECK(b >= agler_lower_bound(Q, P, tuples, std::max(1, N / 2), 11).bound);
      if (N == 4) {
        CHECK(b >= prev);
        prev = b;
      }
    }
}

TEST_CASE("Agler bound at N = 1 is the max modulus over the sampled points") {
  const MPoly p = bidisk_p(3.0);
  const MPoly q = reverse(p);
  const int tuples = 40;
  const std::uint64_t seed = 13;
  const AglerBoundReport r = agler_lower_bound(scalar(q), scalar(p), tuples, 1, seed);
  double want = 0.0;
  for (int j = 0; j < tuples; ++j) {
    const auto fam = j % 2 == 0 ? TupleFamily::Diagonalizable : TupleFamily::SingleGenerator;
    const MatrixPoint z = sample_commuting_tuple(kBidisk, 1, fam, derive_seed(derive_seed(seed, 1), j)).as_point();
    want = std::max(want, std::abs(eval_point(q, z) / eval_point(p, z)));
  }
  CHECK(std::abs(r.bound - want) <= 1e-12);
}

TEST_CASE("lift examples") {
  const BlockStructure s1({2});
  LiftOptions opt;
  opt.stability.budget = 500;
  const LiftResult d = eventual_sa_lift(det_poly(s1, 0), MPoly::constant(s1, 1.0), opt);
  REQUIRE(d.success());
  CHECK(d.s == std::vector<int>{0});

  const MPoly p3 = bidisk_p(3.0) * cplx(1.0 / 3.0);
  const LiftResult l = eventual_sa_lift(reverse(p3), p3, opt, 2);
  REQUIRE(l.success());
  REQUIRE(l.certificate);
  CHECK(verify_certificate(*l.certificate).pass());
  CHECK(verify_colligation(l.synthesis->realization->colligation).pass());

  const MPoly p2 = bidisk_p(2.0);
  const LiftResult f = eventual_sa_lift(reverse(p2), p2, opt, 2);
  CHECK(f.verdict == "PreconditionFailed");
  CHECK_FALSE(f.certificate);

  const LiftResult nf = eventual_sa_lift(MPoly::variable(kBall2, 0), MPoly::constant(kBall2, 1.0), opt);
  CHECK(nf.verdict == "PreconditionFailed");
}
