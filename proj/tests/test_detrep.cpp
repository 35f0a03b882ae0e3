#include <doctest.h>

#include "support.hpp"

using namespace polyball;
using namespace polyball::testing;

namespace {

const BlockStructure kBidisk({1, 1});

CMatrix strict_contraction(int side, double norm, Rng& rng) {
  CMatrix K = ginibre(side, side, rng);
  return K * (norm / spectral_norm(K));
}

cplx det_oracle(const CMatrix& K, const MatrixPoint& z, const std::vector<int>& n) {
  const CMatrix zn = inflate(z, n);
  return (CMatrix::Identity(K.rows(), K.cols()) - K * zn).determinant();
}

}  // namespace

TEST_CASE("det_pencil examples") {
  const BlockStructure s1({1});
  const MPoly zero = det_pencil(CMatrix::Zero(3, 3), s1, {3});
  CHECK(zero.distance(MPoly::constant(s1, 1.0)) == 0.0);

  const cplx c(0.3, 0.4);
  const MPoly lin = det_pencil(CMatrix::Constant(1, 1, c), s1, {1});
  CHECK(lin.distance(MPoly::constant(s1, 1.0) - MPoly::variable(s1, 0, c)) < 1e-15);

  CMatrix A = CMatrix::Zero(2, 2);
  A(0, 1) = 1.0;
  CHECK(det_pencil(A, kBidisk, {1, 1}).distance(MPoly::constant(kBidisk, 1.0)) < 1e-15);

  CHECK_THROWS_AS(det_pencil(CMatrix::Zero(2, 2), kBidisk, {1, 2}), StructureMismatch);
}

TEST_CASE("det_pencil agrees with numeric determinants") {
  Rng rng(3);
  const std::vector<std::pair<BlockStructure, std::vector<int>>> cases = {
      {BlockStructure({1, 1}), {2, 1}}, {BlockStructure({2}), {1}},    {BlockStructure({2}), {2}},
      {BlockStructure({2, 1}), {1, 2}}, {BlockStructure({1, 1}), {4, 3}}, {BlockStructure({3}), {1}}};
  for (const auto& [s, n] : cases) {
    const int side = inflated_side(s, n);
    const CMatrix K = strict_contraction(side, 0.9, rng);
    const MPoly p = det_pencil(K, s, n);
    CHECK(p.constant_term() == cplx(1.0));
    for (int r = 0; r < s.k(); ++r)
      CHECK(p.block_degree(r).value_or(0) <= s.ell(r) * n[static_cast<std::size_t>(r)]);
    for (int i = 0; i < 10; ++i) {
      const MatrixPoint z = sample_interior(s, derive_seed(side, i));
      const cplx want = det_oracle(K, z, n);
      CHECK(std::abs(eval_point(p, z) - want) < 1e-10 * std::max(1.0, std::abs(want)));
    }
  }
}

TEST_CASE("pq identity examples") {
  const BlockStructure s1({1});
  const Colligation empty(s1, {0}, 1, CMatrix(0, 0), CMatrix(0, 1), CMatrix(1, 0), CMatrix::Constant(1, 1, cplx(0, 1)));
  const PqReport e = pq_identity_check(empty);
  CHECK(e.pass);
  CHECK(e.max_deviation < 1e-15);

  const PqReport zz = pq_identity_check(z1z2_colligation(), 50);
  CHECK(zz.trials == 50);
  CHECK(zz.max_deviation < 1e-10);

  const PqReport haar = pq_identity_check(random_unitary_colligation(BlockStructure({1, 2, 1}), {1, 1, 2}, 1, 12), 100);
  CHECK(haar.pass);
  CHECK(haar.max_deviation < 1e-8);
}

TEST_CASE("pq identity holds for random unitary colligations") {
  const std::vector<BlockStructure> structs = {BlockStructure({1, 1}), BlockStructure({2}), BlockStructure({2, 1})};
  for (int i = 0; i < 10; ++i) {
    const BlockStructure& s = structs[static_cast<std::size_t>(i) % structs.size()];
    std::vector<int> n(static_cast<std::size_t>(s.k()));
    for (int r = 0; r < s.k(); ++r) n[static_cast<std::size_t>(r)] = (i + r) % 3;
    const PqReport rep = pq_identity_check(random_unitary_colligation(s, n, 1, derive_seed(40, i)), 30, i);
    CHECK(rep.max_deviation < 1e-8);
  }
}

TEST_CASE("extract_v from the z1 z2 colligation") {
  const DetRepCertificate cert = extract_v(MPoly::constant(kBidisk, 1.0), z1z2_colligation());
  CHECK(cert.v.distance(MPoly::constant(kBidisk, 1.0)) < 1e-12);
  CHECK(std::abs(cert.gamma - cplx(1.0)) < 1e-12);
  CHECK(cert.s == std::vector<int>{1, 1});
  const CertificateReport rep = verify_certificate(cert);
  CHECK(rep.pass());
  CHECK(rep.verdict() == "EventualAglerDenominator-CERTIFIED");
}

TEST_CASE("extract_v rejects a mismatched denominator") {
  const MPoly p = MPoly::constant(kBidisk, 1.0) - MPoly::variable(kBidisk, 0, 0.9);
  CHECK_THROWS_AS(extract_v(p, z1z2_colligation()), NotDivisible);
}

TEST_CASE("tampered certificates fail verification") {
  DetRepCertificate cert = extract_v(MPoly::constant(kBidisk, 1.0), z1z2_colligation());
  DetRepCertificate bigK = cert;
  bigK.K *= 1.2;
  const CertificateReport rk = verify_certificate(bigK);
  CHECK_FALSE(rk.contractive);
  CHECK_FALSE(rk.pass());
  CHECK(rk.verdict() == "Fail");

  DetRepCertificate badv = cert;
  badv.v = badv.v + MPoly::variable(kBidisk, 0, 0.1);
  const CertificateReport rv = verify_certificate(badv);
  CHECK_FALSE(rv.pass());
  CHECK((!rv.divisible || !rv.self_reversive));

  DetRepCertificate bads = cert;
  bads.s = {2, 1};
  CHECK_FALSE(verify_certificate(bads).pass());
}

TEST_CASE("round trip: synthesized colligation to certificate and back") {
  const MPoly p = bidisk_p(2.0);
  const SynthesisResult syn = synthesize(MatPoly::scalar(p), MatPoly::scalar(reverse(p)), 2);
  REQUIRE(syn.success());
  const Colligation& c = syn.realization->colligation;
  const DetRepCertificate cert = extract_v(p, c);
  CHECK(cert.division_residual < 1e-7);
  CHECK(std::abs(std::abs(cert.gamma) - 1.0) < 1e-8);
  for (int r = 0; r < 2; ++r) CHECK(cert.s[static_cast<std::size_t>(r)] >= 0);
  CHECK(verify_certificate(cert).pass());
  for (int i = 0; i < 30; ++i) {
    const MatrixPoint z = sample_interior(kBidisk, derive_seed(17, i));
    CHECK(std::abs(lifted_value(cert, z) - eval_transfer(c, z)(0, 0)) < 1e-6);
  }
}

TEST_CASE("certified lifted functions are unimodular on the Shilov boundary") {
  Rng rng(8);
  const std::vector<std::pair<BlockStructure, std::vector<int>>> cases = {
      {BlockStructure({1, 1}), {1, 1}}, {BlockStructure({2}), {1}}, {BlockStructure({1}), {3}}};
  for (const auto& [s, n] : cases) {
    const CMatrix K = strict_contraction(inflated_side(s, n), 0.8, rng);
    const MPoly p = det_pencil(K, s, n);
    const DetRepCertificate cert = certificate_from_pencil(p, K, n);
    REQUIRE(verify_certificate(cert).pass());
    for (int i = 0; i < 50; ++i) {
      const MatrixPoint u = sample_shilov(s, derive_seed(5, i));
      if (std::abs(eval_point(p, u)) < 1e-8) continue;
      CHECK(std::abs(std::abs(lifted_value(cert, u)) - 1.0) < 1e-8);
    }
  }
}

TEST_CASE("search examples") {
  const BlockStructure s1({1});
  const MPoly p = MPoly::constant(s1, 1.0) - MPoly::variable(s1, 0, 0.5);
  const SearchResult r = search_detrep(p, {1});
  REQUIRE(r.found());
  CHECK(std::abs(r.certificate->K(0, 0) - cplx(0.5)) < 1e-7);
  CHECK(r.certificate->v.distance(MPoly::constant(s1, 1.0)) < 1e-7);

  const SearchResult q = search_detrep(bidisk_p(3.0), {1, 1});
  REQUIRE(q.found());
  CHECK(q.best_residual < 1e-7);
  CHECK(verify_certificate(*q.certificate).pass());
}

TEST_CASE("search recovers planted pencils") {
  Rng rng(21);
  const BlockStructure s({2, 1});
  const std::vector<int> n{1, 1};
  const CMatrix K0 = strict_contraction(3, 0.7, rng);
  const SearchResult r = search_detrep(det_pencil(K0, s, n), n, {}, 4);
  REQUIRE(r.found());
  CHECK(r.best_residual < 1e-7);
  CHECK(verify_certificate(*r.certificate).pass());
}

TEST_CASE("search reports misses without claiming nonexistence") {
  // 2 - z1 - z2 vanishes at (1, 1); the only pencils have norm exactly 1.
  SearchOptions opt;
  opt.starts = 2;
  opt.iters = 50;
  const SearchResult r = search_detrep(bidisk_p(2.0) * cplx(0.5), {1, 1}, opt);
  if (!r.found()) {
    CHECK(r.best_residual >= 0.0);
    CHECK_FALSE(r.message.empty());
  } else {
    CHECK(verify_certificate(*r.certificate).pass());
  }
}
