#include <doctest.h>

#include <filesystem>
#include <functional>

#include "polyball/io.hpp"
#include "support.hpp"

using namespace polyball;
using namespace polyball::testing;

namespace {

const BlockStructure kBidisk({1, 1});

bool same_bits(const CMatrix& a, const CMatrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

std::string error_path(const std::function<void()>& f) {
  try {
    f();
  } catch (const JsonError& e) {
    return e.path();
  }
  return "<no error>";
}

}  // namespace

TEST_CASE("polynomials round-trip bit-exactly") {
  Rng rng(4);
  for (const auto& s : {BlockStructure({1, 1}), BlockStructure({2, 1}), BlockStructure({3})}) {
    const MPoly p = random_poly(s, 3, 6, rng);
    const Json j = to_json(p);
    const MPoly q = poly_from_json(Json::parse(j.dump()));
    CHECK(q.distance(p) == 0.0);
    CHECK(to_json(q).dump() == j.dump());
  }
  const MPoly p = bidisk_p(2.0);
  const Json j = to_json(p);
  CHECK(j["terms"][0]["exps"] == Json{{"z1_11", 1}});
  CHECK(j["terms"].size() == 3);
  CHECK(j["ell"] == Json::array({1, 1}));
}

TEST_CASE("matrix polynomials round-trip and plain polynomials read as 1 x 1") {
  MatPoly m(kBidisk, 2, 1);
  m(0, 0) = bidisk_p(2.0);
  m(1, 0) = MPoly::variable(kBidisk, 1, cplx(0.1, 0.7));
  const MatPoly back = matpoly_from_json(Json::parse(to_json(m).dump()));
  CHECK(back.rows() == 2);
  CHECK(back(1, 0).distance(m(1, 0)) == 0.0);
  const MatPoly one = matpoly_from_json(to_json(bidisk_p(3.0)));
  CHECK(one.rows() == 1);
  CHECK(one(0, 0).distance(bidisk_p(3.0)) == 0.0);
}

TEST_CASE("colligations round-trip bit-exactly") {
  const Colligation c = random_unitary_colligation(BlockStructure({2, 1}), {1, 2}, 2, 6);
  const Colligation d = colligation_from_json(Json::parse(to_json(c).dump()));
  CHECK(same_bits(c.system(), d.system()));
  CHECK(d.n() == c.n());
  CHECK(to_json(d).dump() == to_json(c).dump());

  const BlockStructure s1({1});
  const Colligation e(s1, {0}, 1, CMatrix(0, 0), CMatrix(0, 1), CMatrix(1, 0), CMatrix::Constant(1, 1, 0.5));
  const Colligation f = colligation_from_json(Json::parse(to_json(e).dump()));
  CHECK(f.state_dim() == 0);
  CHECK(f.D()(0, 0) == cplx(0.5));
}

TEST_CASE("Gram certificates round-trip bit-exactly") {
  const MPoly p = bidisk_p(2.0);
  const GramResult r = gram_feasibility(MatPoly::scalar(p), MatPoly::scalar(reverse(p)), 2);
  REQUIRE(r.feasible);
  const GramCertificate back = gram_certificate_from_json(Json::parse(to_json(*r.certificate).dump()));
  CHECK(back.n == r.certificate->n);
  CHECK(back.monomials == r.certificate->monomials);
  for (std::size_t k = 0; k < back.M.size(); ++k) CHECK(same_bits(back.M[k], r.certificate->M[k]));
  CHECK(to_json(back).dump() == to_json(*r.certificate).dump());
}

TEST_CASE("detrep certificates round-trip bit-exactly and verify from JSON alone") {
  Rng rng(12);
  CMatrix K = ginibre(3, 3, rng);
  K *= 0.8 / spectral_norm(K);
  const BlockStructure s({2, 1});
  const DetRepCertificate cert = certificate_from_pencil(det_pencil(K, s, {1, 1}), K, {1, 1});
  const std::string text = to_json(cert).dump(2);
  const DetRepCertificate back = detrep_from_json(Json::parse(text));
  CHECK(same_bits(back.K, cert.K));
  CHECK(back.p.distance(cert.p) == 0.0);
  CHECK(back.v.distance(cert.v) == 0.0);
  CHECK(back.gamma == cert.gamma);
  CHECK(back.s == cert.s);
  CHECK(to_json(back).dump(2) == text);
  CHECK(verify_certificate(back).pass());
}

TEST_CASE("points and tuples round-trip") {
  const BlockStructure s({2, 1});
  const MatrixPoint z = sample_interior(s, 3);
  const MatrixPoint w = point_from_json(Json::parse(to_json(z).dump()));
  for (int r = 0; r < s.k(); ++r) CHECK(same_bits(z.block(r), w.block(r)));
  const CommutingTuple t = sample_commuting_tuple(s, 3, TupleFamily::SingleGenerator, 5);
  const CommutingTuple u = tuple_from_json(Json::parse(to_json(t).dump()));
  for (int v = 0; v < s.d(); ++v) CHECK(same_bits(t.mat(v), u.mat(v)));
}

TEST_CASE("malformed input names the offending path") {
  CHECK(error_path([] { poly_from_json(Json::parse(R"({"terms": []})")); }) == "$.ell");
  CHECK(error_path([] {
          poly_from_json(Json::parse(R"({"ell": [1, 1], "terms": [{"coeff": [1, 0], "exps": {"z3_11": 1}}]})"));
        }) == "$.terms[0].exps.z3_11");
  CHECK(error_path([] {
          poly_from_json(Json::parse(R"({"ell": [1], "terms": [{"coeff": "x", "exps": {}}]})"));
        }) == "$.terms[0].coeff");
  CHECK(error_path([] { structure_from_json(Json::parse(R"({"ell": [1, 0]})")); }) == "$.ell");
  CHECK(error_path([] { matrix_from_json(Json::parse(R"([[[1, 0]], [[1, 0], [0, 0]]])")); }) == "$[1]");
}

TEST_CASE("atomic writes leave no temporary file") {
  const auto dir = std::filesystem::temp_directory_path() / "polyball_io_test";
  std::filesystem::create_directories(dir);
  const std::string file = (dir / "out.json").string();
  write_text_atomic(file, "{\"a\": 1}\n");
  write_text_atomic(file, "{\"a\": 2}\n");
  CHECK(read_json_file(file)["a"] == 2);
  CHECK_FALSE(std::filesystem::exists(file + ".tmp"));
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(read_json_file((dir / "missing.json").string()), Error);
}
