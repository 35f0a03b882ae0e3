#include "polyball/cli.hpp"

#include <CLI11.hpp>

#include <initializer_list>
#include <iostream>
#include <sstream>
#include <utility>

#include "polyball/io.hpp"

namespace polyball {

namespace {

struct Options {
  std::string in, num, den, colligation, point, tuple, poly, out, witness_out;
  std::string degrees, n, schedule, mode = "open";
  std::uint64_t seed = 0;
  int threads = 1;
  int samples = 200;
  int shilov = 100;
  int tuples = 300;
  int nmax = 6;
  int g = -1;
  int budget = 10000;
  int polish = 32;
  int starts = 8;
  int iters = 300;
  long max_iters = 200000;
  double tol = -1.0;
  bool reduced = false;
};

std::vector<int> parse_ints(const std::string& text, const std::string& flag) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw CLI::ValidationError(flag, "expected comma-separated integers, got '" + text + "'");
    }
  }
  return out;
}

std::vector<std::vector<int>> parse_schedule(const std::string& text) {
  std::vector<std::vector<int>> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';'))
    if (!item.empty()) out.push_back(parse_ints(item, "--schedule"));
  return out;
}

double tol_or(const Options& o, double fallback) { return o.tol > 0.0 ? o.tol : fallback; }

struct Outcome {
  std::string verdict;
  Json data;
  int code;
};

Json config_of(const Options& o, const CLI::App& sub) {
  Json c = Json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_lnames().empty() || opt->get_lnames().front() == "help") continue;
    const std::string key = opt->get_lnames().front();
    if (key == "seed" || key == "threads") continue;
    if (opt->get_expected_min() == 0)
      c[key] = opt->count() > 0;
    else if (opt->count() > 0)
      c[key] = opt->results().front();
    else
      c[key] = opt->get_default_str();
  }
  c["seed"] = o.seed;
  c["threads"] = o.threads;
  return c;
}

// Follows `route` from a report envelope down to its payload; bare inputs pass through.
std::pair<Json, std::string> payload(const std::string& file, std::initializer_list<const char*> route) {
  Json j = read_json_file(file);
  std::string path = file;
  auto descend = [&](const char* key) {
    Json inner = j.at(key);
    j = std::move(inner);
    path += std::string(".") + key;
  };
  if (j.is_object() && j.contains("command") && j.contains("data")) descend("data");
  for (const char* key : route)
    if (j.is_object() && !j.contains("ell") && j.contains(key)) descend(key);
  return {std::move(j), path};
}

MPoly read_poly(const std::string& file) {
  const auto [j, path] = payload(file, {"poly"});
  return poly_from_json(j, path);
}
MatPoly read_matpoly(const std::string& file) {
  const auto [j, path] = payload(file, {"poly"});
  return matpoly_from_json(j, path);
}
Colligation read_colligation(const std::string& file) {
  const auto [j, path] = payload(file, {"synthesis", "realization", "colligation"});
  return colligation_from_json(j, path);
}

void require(const std::string& value, const std::string& flag) {
  if (value.empty()) throw CLI::RequiredError(flag);
}

Outcome cmd_reverse(const Options& o) {
  require(o.in, "--in");
  const MPoly p = read_poly(o.in);
  Json data;
  if (o.reduced) {
    const ReducedReverse rr = reduced_reverse(p);
    data = Json{{"degrees", rr.degrees}, {"poly", to_json(rr.poly)}};
  } else {
    const DegreeVector t = o.degrees.empty() ? (p.is_zero() ? DegreeVector(static_cast<std::size_t>(p.structure().k()), 0) : p.degrees())
                                             : parse_ints(o.degrees, "--degrees");
    data = Json{{"degrees", t}, {"poly", to_json(reverse(p, t))}};
  }
  return {"Success", data, 0};
}

Outcome cmd_factorize(const Options& o) {
  require(o.num, "--num");
  require(o.den, "--den");
  const RudinResult r = rudin_factorize(read_poly(o.num), read_poly(o.den), tol_or(o, 1e-9));
  return {r.ok ? "Success" : "NotInnerForm", to_json(r), r.ok ? 0 : 1};
}

Outcome cmd_check_inner(const Options& o) {
  require(o.num, "--num");
  require(o.den, "--den");
  const InnerReport r = check_inner(read_poly(o.num), read_poly(o.den), o.samples, o.seed, tol_or(o, 1e-8));
  return {r.verdict, to_json(r), r.pass() ? 0 : 1};
}

Outcome cmd_stability(const Options& o) {
  require(o.in, "--in");
  StabilityMode mode;
  if (o.mode == "open")
    mode = StabilityMode::Open;
  else if (o.mode == "closed")
    mode = StabilityMode::Closed;
  else
    throw CLI::ValidationError("--mode", "must be open or closed");
  StabilityOptions so;
  so.budget = o.budget;
  so.polish = o.polish;
  so.threads = o.threads;
  so.zero_tol = tol_or(o, 1e-8);
  const StabilityReport r = stability_scan(read_poly(o.in), mode, so, o.seed);
  return {r.verdict, to_json(r), r.zero_found() ? 1 : 0};
}

Outcome cmd_synthesize(const Options& o) {
  require(o.num, "--num");
  require(o.den, "--den");
  const MatPoly Q = read_matpoly(o.num), P = read_matpoly(o.den);
  int g = o.g;
  if (g < 0) {
    g = 0;
    for (const MatPoly* x : {&Q, &P})
      if (auto t = x->total_degree()) g = std::max(g, *t);
  }
  GramOptions go;
  go.tol = tol_or(o, 1e-7);
  go.max_iters = o.max_iters;
  const SynthesisResult r = synthesize(P, Q, g, go, o.seed);
  Json data = to_json(r);
  data["g"] = g;
  return {r.verdict, data, r.success() ? 0 : 1};
}

Outcome cmd_verify_colligation(const Options& o) {
  require(o.in, "--in");
  VerifyOptions vo;
  vo.shilov_samples = o.shilov;
  vo.tuples = o.tuples;
  vo.N_max = o.nmax;
  vo.seed = o.seed;
  vo.inner_tol = tol_or(o, 1e-8);
  const Colligation c = read_colligation(o.in);
  const ColligationReport r = verify_colligation(c, vo);
  return {r.pass() ? "Pass" : "Fail", to_json(r), r.pass() ? 0 : 1};
}

Outcome cmd_eval(const Options& o) {
  if (o.point.empty() == o.tuple.empty()) throw CLI::ValidationError("--point/--tuple", "give exactly one");
  Json data;
  if (!o.colligation.empty()) {
    const Colligation c = read_colligation(o.colligation);
    const CMatrix v = o.point.empty() ? eval_transfer(c, tuple_from_json(read_json_file(o.tuple), o.tuple))
                                      : eval_transfer(c, point_from_json(read_json_file(o.point), o.point));
    data = Json{{"source", "colligation"}, {"value", to_json(v)}, {"norm", spectral_norm(v)}};
  } else {
    require(o.num, "--num or --colligation");
    require(o.den, "--den");
    const MatPoly Q = read_matpoly(o.num), P = read_matpoly(o.den);
    CMatrix Pv, Qv;
    if (o.point.empty()) {
      const CommutingTuple t = tuple_from_json(read_json_file(o.tuple), o.tuple);
      Pv = eval_tuple(P, t);
      Qv = eval_tuple(Q, t);
    } else {
      const MatrixPoint z = point_from_json(read_json_file(o.point), o.point);
      Pv = eval_point(P, z);
      Qv = eval_point(Q, z);
    }
    if (Pv.rows() != Pv.cols() || condition_number(Pv) > 1e12)
      return {"Singular", Json{{"source", "fraction"}, {"condition", condition_number(Pv)}}, 1};
    const CMatrix v = Qv * Pv.partialPivLu().inverse();
    data = Json{{"source", "fraction"}, {"value", to_json(v)}, {"norm", spectral_norm(v)}};
  }
  return {"Success", data, 0};
}

Outcome cmd_detrep(const Options& o) {
  require(o.in, "--in");
  const Json j = read_json_file(o.in);
  const BlockStructure s = structure_from_json(j, o.in);
  std::vector<int> n;
  if (!o.n.empty()) {
    n = parse_ints(o.n, "--n");
  } else {
    const Json& nj = j.contains("n") ? j.at("n") : throw JsonError(o.in + ".n", "missing field");
    for (std::size_t i = 0; i < nj.size(); ++i) {
      if (!nj[i].is_number_integer()) throw JsonError(o.in + ".n[" + std::to_string(i) + "]", "expected an integer");
      n.push_back(nj[i].get<int>());
    }
  }
  if (!j.contains("K")) throw JsonError(o.in + ".K", "missing field");
  CMatrix K = matrix_from_json(j.at("K"), o.in + ".K");
  if (K.size() == 0) K.resize(inflated_side(s, n), inflated_side(s, n));
  const MPoly p = det_pencil(K, s, n);
  return {"Success", Json{{"n", n}, {"poly", to_json(p)}}, 0};
}

Outcome cmd_extract_v(const Options& o) {
  require(o.poly, "--poly");
  require(o.colligation, "--colligation");
  const MPoly p = read_poly(o.poly);
  const Colligation c = read_colligation(o.colligation);
  try {
    const DetRepCertificate cert = extract_v(p, c, tol_or(o, 1e-7));
    const CertificateReport rep = verify_certificate(cert, o.seed);
    return {rep.pass() ? "Success" : "Fail", Json{{"certificate", to_json(cert)}, {"check", to_json(rep)}},
            rep.pass() ? 0 : 1};
  } catch (const NotDivisible& e) {
    return {"NotDivisible", Json{{"message", e.what()}}, 1};
  } catch (const SelfReversiveFail& e) {
    return {"SelfReversiveFail", Json{{"message", e.what()}}, 1};
  } catch (const InvalidCertificate& e) {
    return {"NegativeShift", Json{{"message", e.what()}}, 1};
  }
}

Outcome cmd_verify_cert(const Options& o) {
  require(o.in, "--in");
  // Accepts a bare certificate, a result holding one, or a full report envelope.
  const auto [j, path] = payload(o.in, {"certificate"});
  const DetRepCertificate cert = detrep_from_json(j, path);
  const CertificateReport r = verify_certificate(cert, o.seed);
  return {r.verdict(), to_json(r), r.pass() ? 0 : 1};
}

Outcome cmd_search_detrep(const Options& o) {
  require(o.in, "--in");
  require(o.n, "--n");
  SearchOptions so;
  so.starts = o.starts;
  so.iters = o.iters;
  so.tol = tol_or(o, 1e-7);
  const SearchResult r = search_detrep(read_poly(o.in), parse_ints(o.n, "--n"), so, o.seed);
  return {r.found() ? "Success" : "NotFound", to_json(r), r.found() ? 0 : 1};
}

Outcome cmd_agler_bound(const Options& o) {
  require(o.num, "--num");
  require(o.den, "--den");
  const AglerBoundReport r = agler_lower_bound(read_matpoly(o.num), read_matpoly(o.den), o.tuples, o.nmax, o.seed,
                                               o.threads);
  if (!o.witness_out.empty() && r.witness) write_text_atomic(o.witness_out, to_json(*r.witness).dump(2) + "\n");
  return {r.verdict, to_json(r), r.verdict == "Bound" ? 0 : 1};
}

Outcome cmd_lift(const Options& o) {
  require(o.num, "--num");
  require(o.den, "--den");
  LiftOptions lo;
  lo.n_schedule = parse_schedule(o.schedule);
  lo.search.starts = o.starts;
  lo.search.iters = o.iters;
  lo.stability.budget = o.budget;
  lo.stability.polish = o.polish;
  lo.stability.threads = o.threads;
  lo.gram.max_iters = o.max_iters;
  const LiftResult r = eventual_sa_lift(read_poly(o.num), read_poly(o.den), lo, o.seed);
  return {r.verdict, to_json(r), r.success() ? 0 : 1};
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"polyball: rational inner functions, Schur-Agler realizations and determinantal "
               "certificates on square-matrix polyballs"};
  app.require_subcommand(1, 1);
  Options o;

  auto common = [&](CLI::App* s) {
    s->add_option("--out", o.out, "Report file (default: stdout)");
    s->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    s->add_option("--threads", o.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  };
  auto tol = [&](CLI::App* s, const std::string& def) {
    s->add_option("--tol", o.tol, "Tolerance override (default " + def + ")");
  };

  auto* rev = app.add_subcommand(
      "reverse", "Reverse polynomial prod_r det(Z^(r))^t_r conj(p(Z^{*-1})), the numerator of every "
                 "rational inner function over p");
  rev->add_option("--in", o.in, "Polynomial JSON")->required();
  rev->add_option("--degrees", o.degrees, "Degree vector t, e.g. 1,1 (default: natural degrees)");
  rev->add_flag("--reduced", o.reduced, "Use the smallest degree vector with a polynomial reverse");

  auto* fac = app.add_subcommand(
      "factorize", "Structure theorem for rational inner functions: q = gamma prod det^m times the reverse of p");
  fac->add_option("--num", o.num, "Numerator q JSON")->required();
  fac->add_option("--den", o.den, "Denominator p JSON")->required();
  tol(fac, "1e-9");

  auto* inner = app.add_subcommand("check-inner", "Rational inner test: |q/p| = 1 on the Shilov boundary");
  inner->add_option("--num", o.num, "Numerator q JSON")->required();
  inner->add_option("--den", o.den, "Denominator p JSON")->required();
  inner->add_option("--samples", o.samples, "Shilov samples")->capture_default_str();
  tol(inner, "1e-8");

  auto* stab = app.add_subcommand(
      "stability", "Stability test: heuristic search for zeros of p in the open (stable) or closed "
                   "(strongly stable) polyball");
  stab->add_option("--in", o.in, "Polynomial JSON")->required();
  stab->add_option("--mode", o.mode, "open or closed")->capture_default_str();
  stab->add_option("--budget", o.budget, "Number of random starts")->capture_default_str();
  stab->add_option("--polish", o.polish, "Starts refined by Nelder-Mead")->capture_default_str();
  tol(stab, "1e-8 for |p| at a zero");

  auto* syn = app.add_subcommand(
      "synthesize", "Schur-Agler realization theorem, necessity: Agler decomposition of P^*P - Q^*Q by "
                    "semidefinite feasibility, then a unitary colligation by the lurking isometry");
  syn->add_option("--num", o.num, "Numerator Q JSON (polynomial or matrix polynomial)")->required();
  syn->add_option("--den", o.den, "Denominator P JSON (polynomial or matrix polynomial)")->required();
  syn->add_option("--g", o.g, "Degree bound g (default: max total degree of P and Q)");
  syn->add_option("--max-iters", o.max_iters, "Projection iterations")->capture_default_str();
  tol(syn, "1e-7 coefficient residual");

  auto* ver = app.add_subcommand(
      "verify-colligation", "Schur-Agler realization theorem, sufficiency: a unitary colligation has an "
                            "inner transfer function bounded by 1 on commuting contractions");
  ver->add_option("--in", o.in, "Colligation JSON")->required();
  ver->add_option("--shilov", o.shilov, "Shilov samples")->capture_default_str();
  ver->add_option("--tuples", o.tuples, "Commuting tuples")->capture_default_str();
  ver->add_option("--nmax", o.nmax, "Largest tuple dimension N")->capture_default_str();
  tol(ver, "1e-8 unitarity defect on the boundary");

  auto* ev = app.add_subcommand("eval", "Evaluate a transfer function or Q P^{-1} at a point or a commuting tuple");
  ev->add_option("--colligation", o.colligation, "Colligation JSON");
  ev->add_option("--num", o.num, "Numerator Q JSON");
  ev->add_option("--den", o.den, "Denominator P JSON");
  ev->add_option("--point", o.point, "Matrix point JSON");
  ev->add_option("--tuple", o.tuple, "Commuting tuple JSON");

  auto* det = app.add_subcommand("detrep", "Determinantal pencil det(I - K Z_n) as a polynomial");
  det->add_option("--in", o.in, "JSON with ell, n and K")->required();
  det->add_option("--n", o.n, "Block multiplicities, overriding the file");

  auto* ext = app.add_subcommand(
      "extract-v", "Eventual Agler denominators, realization to representation: p v = det(I - A Z_n) with v "
                   "almost self-reversive and K = A contractive");
  ext->add_option("--poly", o.poly, "Polynomial p JSON")->required();
  ext->add_option("--colligation", o.colligation, "Colligation JSON")->required();
  tol(ext, "1e-7 division residual");

  auto* vc = app.add_subcommand(
      "verify-cert", "Eventual Agler denominators, representation to Schur-Agler: re-check a certificate "
                     "from its JSON alone");
  vc->add_option("--in", o.in, "Certificate JSON")->required();

  auto* sd = app.add_subcommand(
      "search-detrep", "Strongly stable polynomials are eventual Agler denominators: best-effort search for a "
                       "contractive determinantal representation");
  sd->add_option("--in", o.in, "Polynomial p JSON")->required();
  sd->add_option("--n", o.n, "Block multiplicities, e.g. 1,1")->required();
  sd->add_option("--starts", o.starts, "Multi-start count")->capture_default_str();
  sd->add_option("--iters", o.iters, "Levenberg-Marquardt iterations per start")->capture_default_str();
  tol(sd, "1e-7 remainder coefficient");

  auto* ab = app.add_subcommand(
      "agler-bound", "Agler norm lower bound: max ||Q(T) P(T)^{-1}|| over sampled commuting strict contractions");
  ab->add_option("--num", o.num, "Numerator Q JSON")->required();
  ab->add_option("--den", o.den, "Denominator P JSON")->required();
  ab->add_option("--tuples", o.tuples, "Tuples per dimension N")->capture_default_str();
  ab->add_option("--nmax", o.nmax, "Largest tuple dimension N")->capture_default_str();
  ab->add_option("--witness-out", o.witness_out, "Write the witness tuple to this file");

  auto* lift = app.add_subcommand(
      "lift", "Det-power lifting of a rational inner function with strongly stable denominator into the "
              "Schur-Agler class");
  lift->add_option("--num", o.num, "Numerator q JSON")->required();
  lift->add_option("--den", o.den, "Denominator p JSON")->required();
  lift->add_option("--schedule", o.schedule, "Multiplicity schedule, e.g. 1,1;2,2 (default: tau(p) + 0..2)");
  lift->add_option("--budget", o.budget, "Stability scan starts")->capture_default_str();
  lift->add_option("--polish", o.polish, "Stability starts refined")->capture_default_str();
  lift->add_option("--starts", o.starts, "Search multi-start count")->capture_default_str();
  lift->add_option("--iters", o.iters, "Search iterations per start")->capture_default_str();
  lift->add_option("--max-iters", o.max_iters, "Projection iterations")->capture_default_str();

  for (CLI::App* s : app.get_subcommands({})) common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string cmd = sub->get_name();
  try {
    Outcome res;
    if (cmd == "reverse") res = cmd_reverse(o);
    else if (cmd == "factorize") res = cmd_factorize(o);
    else if (cmd == "check-inner") res = cmd_check_inner(o);
    else if (cmd == "stability") res = cmd_stability(o);
    else if (cmd == "synthesize") res = cmd_synthesize(o);
    else if (cmd == "verify-colligation") res = cmd_verify_colligation(o);
    else if (cmd == "eval") res = cmd_eval(o);
    else if (cmd == "detrep") res = cmd_detrep(o);
    else if (cmd == "extract-v") res = cmd_extract_v(o);
    else if (cmd == "verify-cert") res = cmd_verify_cert(o);
    else if (cmd == "search-detrep") res = cmd_search_detrep(o);
    else if (cmd == "agler-bound") res = cmd_agler_bound(o);
    else res = cmd_lift(o);

    const Json report{{"command", cmd}, {"config", config_of(o, *sub)}, {"verdict", res.verdict}, {"data", res.data}};
    const std::string text = report.dump(2) + "\n";
    if (o.out.empty())
      out << text;
    else
      write_text_atomic(o.out, text);
    return res.code;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const JsonError& e) {
    err << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace polyball
