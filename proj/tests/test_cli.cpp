#include <doctest.h>

#include <sstream>

#include "cli_fixtures.hpp"
#include "polyball/cli.hpp"

using namespace polyball;
using namespace polyball::testing;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "polyball");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

const std::filesystem::path kDir = std::filesystem::temp_directory_path() / "polyball_cli_test";

}  // namespace

TEST_CASE("reverse writes 2 z1 z2 - z1 - z2") {
  const auto cmds = write_cli_fixtures(kDir);
  const Outcome o = run_cli(cmds[0]);
  REQUIRE(o.code == 0);
  const Json j = Json::parse(o.out);
  CHECK(j["command"] == "reverse");
  CHECK(j["config"]["degrees"] == "1,1");
  const MPoly got = poly_from_json(j["data"]["poly"]);
  const BlockStructure s({1, 1});
  const MPoly z1 = MPoly::variable(s, 0), z2 = MPoly::variable(s, 1);
  CHECK(got.distance(z1 * z2 * 2.0 - z1 - z2) < 1e-15);
}

TEST_CASE("verify-colligation passes on the z1 z2 colligation") {
  const auto cmds = write_cli_fixtures(kDir);
  const Outcome o = run_cli(cmds[5]);
  CHECK(o.code == 0);
  CHECK(Json::parse(o.out)["verdict"] == "Pass");
}

TEST_CASE("check-inner reports a well-formed negative for (z1 + z2) / 2") {
  const auto cmds = write_cli_fixtures(kDir);
  const BlockStructure s({1, 1});
  write_text_atomic((kDir / "sum.json").string(),
                    to_json(MPoly::variable(s, 0) + MPoly::variable(s, 1)).dump());
  write_text_atomic((kDir / "two.json").string(), to_json(MPoly::constant(s, 2.0)).dump());
  const Outcome o =
      run_cli({"check-inner", "--num", (kDir / "sum.json").string(), "--den", (kDir / "two.json").string()});
  CHECK(o.code == 1);
  CHECK(Json::parse(o.out)["verdict"] == "Fail");
}

TEST_CASE("usage and input errors exit with 2") {
  const auto cmds = write_cli_fixtures(kDir);
  CHECK(run_cli({"no-such-command"}).code == 2);
  CHECK(run_cli({}).code == 2);
  CHECK(run_cli({"reverse", "--in", (kDir / "p.json").string(), "--bogus"}).code == 2);
  CHECK(run_cli({"reverse", "--in", (kDir / "missing.json").string()}).code == 2);
  CHECK(run_cli({"reverse", "--in", (kDir / "p.json").string(), "--degrees", "1,x"}).code == 2);

  write_text_atomic((kDir / "bad.json").string(), R"({"ell": [1, 1], "terms": [{"coeff": [1, 0], "exps": {"z3_11": 1}}]})");
  const Outcome bad = run_cli({"reverse", "--in", (kDir / "bad.json").string()});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("terms[0].exps.z3_11") != std::string::npos);

  write_text_atomic((kDir / "broken.json").string(), "{\"ell\": [1,");
  CHECK(run_cli({"reverse", "--in", (kDir / "broken.json").string()}).code == 2);
}

TEST_CASE("every subcommand has help naming its result") {
  const auto cmds = write_cli_fixtures(kDir);
  for (const auto& c : cmds) {
    const Outcome o = run_cli({c[0], "--help"});
    CHECK(o.code == 0);
    CHECK(o.out.size() + o.err.size() > 50);
  }
}

TEST_CASE("reports echo the configuration and write atomically") {
  const auto cmds = write_cli_fixtures(kDir);
  auto args = cmds[1];
  const std::string file = (kDir / "factorize_out.json").string();
  args.insert(args.end(), {"--out", file, "--seed", "5"});
  const Outcome o = run_cli(args);
  CHECK(o.code == 0);
  const Json j = read_json_file(file);
  CHECK(j["config"]["seed"] == 5);
  CHECK(j["config"]["num"] == cmds[1][2]);
  CHECK(j["verdict"] == "Success");
  CHECK_FALSE(std::filesystem::exists(file + ".tmp"));
}

TEST_CASE("identical inputs and seeds give byte-identical reports") {
  const auto cmds = write_cli_fixtures(kDir);
  for (const auto& c : cmds) {
    const Outcome a = run_cli(c), b = run_cli(c);
    CHECK_MESSAGE(a.code == b.code, c[0]);
    CHECK_MESSAGE(a.out == b.out, c[0]);
    CHECK(a.code != 2);
  }
}

TEST_CASE("reports feed later commands directly") {
  write_cli_fixtures(kDir);
  const std::string p = (kDir / "p.json").string(), q = (kDir / "q_report.json").string();
  const std::string syn = (kDir / "syn_report.json").string(), cert = (kDir / "cert_report.json").string();
  REQUIRE(run_cli({"reverse", "--in", p, "--degrees", "1,1", "--out", q}).code == 0);
  REQUIRE(run_cli({"synthesize", "--num", q, "--den", p, "--g", "2", "--out", syn}).code == 0);
  CHECK(run_cli({"verify-colligation", "--in", syn}).code == 0);
  REQUIRE(run_cli({"extract-v", "--poly", p, "--colligation", syn, "--out", cert}).code == 0);
  const Outcome v = run_cli({"verify-cert", "--in", cert});
  CHECK(v.code == 0);
  CHECK(Json::parse(v.out)["verdict"] == "EventualAglerDenominator-CERTIFIED");
}
