#include "polyball/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace polyball {

namespace {

std::string sub(const std::string& path, const std::string& key) { return path + "." + key; }
std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

const Json& field(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw JsonError(path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw JsonError(sub(path, key), "missing field");
  return *it;
}

const Json& array(const Json& j, const std::string& path) {
  if (!j.is_array()) throw JsonError(path, "expected an array");
  return j;
}

double number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw JsonError(path, "expected a number");
  return j.get<double>();
}

long long integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw JsonError(path, "expected an integer");
  return j.get<long long>();
}

std::vector<int> int_list(const Json& j, const std::string& path) {
  std::vector<int> out;
  for (std::size_t i = 0; i < array(j, path).size(); ++i)
    out.push_back(static_cast<int>(integer(j[i], at(path, i))));
  return out;
}

// Zero-sized matrices serialize as [] and lose one dimension.
CMatrix shaped(CMatrix m, Eigen::Index rows, Eigen::Index cols) {
  if (m.size() == 0 && (rows == 0 || cols == 0)) return CMatrix(rows, cols);
  return m;
}

Json terms_json(const MPoly& p) {
  Json terms = Json::array();
  const auto& s = p.structure();
  for (auto it = p.terms().rbegin(); it != p.terms().rend(); ++it) {
    Json exps = Json::object();
    for (int v = 0; v < s.d(); ++v)
      if (it->first[static_cast<std::size_t>(v)] != 0) exps[s.variable_name(v)] = it->first[static_cast<std::size_t>(v)];
    terms.push_back(Json{{"coeff", to_json(it->second)}, {"exps", exps}});
  }
  return terms;
}

MPoly terms_from_json(const BlockStructure& s, const Json& j, const std::string& path) {
  MPoly p(s);
  for (std::size_t t = 0; t < array(j, path).size(); ++t) {
    const std::string tp = at(path, t);
    const cplx c = complex_from_json(field(j[t], "coeff", tp), sub(tp, "coeff"));
    Exponent e(static_cast<std::size_t>(s.d()), 0);
    const auto it = j[t].find("exps");
    if (it != j[t].end()) {
      const std::string ep = sub(tp, "exps");
      if (!it->is_object()) throw JsonError(ep, "expected an object of exponents");
      for (const auto& [name, val] : it->items()) {
        const int v = s.variable_index(name);
        if (v < 0) throw JsonError(sub(ep, name), "unknown variable for this structure");
        const long long x = integer(val, sub(ep, name));
        if (x < 0 || x > 65535) throw JsonError(sub(ep, name), "exponent out of range");
        e[static_cast<std::size_t>(v)] = static_cast<std::uint16_t>(x);
      }
    }
    if (c != cplx(0.0)) p.add_term(e, c);
  }
  return p;
}

Json exponent_json(const BlockStructure& s, const Exponent& e) {
  Json exps = Json::object();
  for (int v = 0; v < s.d(); ++v)
    if (e[static_cast<std::size_t>(v)] != 0) exps[s.variable_name(v)] = e[static_cast<std::size_t>(v)];
  return exps;
}

template <class T>
Json optional_json(const std::optional<T>& x) {
  return x ? to_json(*x) : Json(nullptr);
}

}  // namespace

Json to_json(const BlockStructure& s) { return Json(s.ells()); }

BlockStructure structure_from_json(const Json& j, const std::string& path) {
  const std::string p = sub(path, "ell");
  const auto ell = int_list(field(j, "ell", path), p);
  try {
    return BlockStructure(ell);
  } catch (const Error& e) {
    throw JsonError(p, e.what());
  }
}

Json to_json(cplx c) { return Json::array({c.real(), c.imag()}); }

cplx complex_from_json(const Json& j, const std::string& path) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2) throw JsonError(path, "expected [re, im]");
  return {number(j[0], at(path, 0)), number(j[1], at(path, 1))};
}

Json to_json(const CMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(to_json(m(i, k)));
    rows.push_back(std::move(row));
  }
  return rows;
}

CMatrix matrix_from_json(const Json& j, const std::string& path) {
  array(j, path);
  const auto rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows ? static_cast<Eigen::Index>(array(j[0], at(path, 0)).size()) : 0;
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const std::string rp = at(path, static_cast<std::size_t>(i));
    const Json& row = array(j[static_cast<std::size_t>(i)], rp);
    if (static_cast<Eigen::Index>(row.size()) != cols) throw JsonError(rp, "ragged matrix row");
    for (Eigen::Index k = 0; k < cols; ++k)
      m(i, k) = complex_from_json(row[static_cast<std::size_t>(k)], at(rp, static_cast<std::size_t>(k)));
  }
  return m;
}

Json to_json(const MatrixPoint& z) {
  Json blocks = Json::array();
  for (const auto& b : z.blocks()) blocks.push_back(to_json(b));
  return Json{{"ell", to_json(z.structure())}, {"blocks", blocks}};
}

MatrixPoint point_from_json(const Json& j, const std::string& path) {
  const BlockStructure s = structure_from_json(j, path);
  const std::string bp = sub(path, "blocks");
  const Json& bj = array(field(j, "blocks", path), bp);
  std::vector<CMatrix> blocks;
  for (std::size_t r = 0; r < bj.size(); ++r) blocks.push_back(matrix_from_json(bj[r], at(bp, r)));
  try {
    return MatrixPoint(s, std::move(blocks));
  } catch (const Error& e) {
    throw JsonError(bp, e.what());
  }
}

Json to_json(const CommutingTuple& t) {
  Json mats = Json::object();
  for (int v = 0; v < t.structure().d(); ++v) mats[t.structure().variable_name(v)] = to_json(t.mat(v));
  return Json{{"ell", to_json(t.structure())}, {"N", t.N()}, {"mats", mats}};
}

CommutingTuple tuple_from_json(const Json& j, const std::string& path) {
  const BlockStructure s = structure_from_json(j, path);
  const int N = static_cast<int>(integer(field(j, "N", path), sub(path, "N")));
  const std::string mp = sub(path, "mats");
  const Json& mj = field(j, "mats", path);
  if (!mj.is_object()) throw JsonError(mp, "expected an object keyed by variable name");
  std::vector<CMatrix> mats;
  for (int v = 0; v < s.d(); ++v) {
    const std::string name = s.variable_name(v);
    mats.push_back(matrix_from_json(field(mj, name, mp), sub(mp, name)));
  }
  for (const auto& [name, val] : mj.items())
    if (s.variable_index(name) < 0) throw JsonError(sub(mp, name), "unknown variable for this structure");
  try {
    return CommutingTuple(s, N, std::move(mats));
  } catch (const Error& e) {
    throw JsonError(path, e.what());
  }
}

Json to_json(const MPoly& p) { return Json{{"ell", to_json(p.structure())}, {"terms", terms_json(p)}}; }

MPoly poly_from_json(const Json& j, const std::string& path) {
  const BlockStructure s = structure_from_json(j, path);
  return terms_from_json(s, field(j, "terms", path), sub(path, "terms"));
}

Json to_json(const MatPoly& p) {
  Json rows = Json::array();
  for (int i = 0; i < p.rows(); ++i) {
    Json row = Json::array();
    for (int k = 0; k < p.cols(); ++k) row.push_back(Json{{"terms", terms_json(p(i, k))}});
    rows.push_back(std::move(row));
  }
  return Json{{"ell", to_json(p.structure())}, {"rows", p.rows()}, {"cols", p.cols()}, {"entries", rows}};
}

MatPoly matpoly_from_json(const Json& j, const std::string& path) {
  if (j.is_object() && j.contains("terms") && !j.contains("entries")) return MatPoly::scalar(poly_from_json(j, path));
  const BlockStructure s = structure_from_json(j, path);
  const int rows = static_cast<int>(integer(field(j, "rows", path), sub(path, "rows")));
  const int cols = static_cast<int>(integer(field(j, "cols", path), sub(path, "cols")));
  if (rows < 1 || cols < 1) throw JsonError(path, "rows and cols must be positive");
  const std::string ep = sub(path, "entries");
  const Json& ej = array(field(j, "entries", path), ep);
  if (static_cast<int>(ej.size()) != rows) throw JsonError(ep, "expected " + std::to_string(rows) + " rows");
  MatPoly m(s, rows, cols);
  for (int i = 0; i < rows; ++i) {
    const std::string rp = at(ep, static_cast<std::size_t>(i));
    const Json& rj = array(ej[static_cast<std::size_t>(i)], rp);
    if (static_cast<int>(rj.size()) != cols) throw JsonError(rp, "expected " + std::to_string(cols) + " entries");
    for (int k = 0; k < cols; ++k) {
      const std::string cp = at(rp, static_cast<std::size_t>(k));
      m(i, k) = terms_from_json(s, field(rj[static_cast<std::size_t>(k)], "terms", cp), sub(cp, "terms"));
    }
  }
  return m;
}

Json to_json(const Colligation& c) {
  return Json{{"ell", to_json(c.structure())}, {"n", c.n()},           {"s", c.s()},
              {"A", to_json(c.A())},           {"B", to_json(c.B())},  {"C", to_json(c.C())},
              {"D", to_json(c.D())}};
}

Colligation colligation_from_json(const Json& j, const std::string& path) {
  const BlockStructure s = structure_from_json(j, path);
  const auto n = int_list(field(j, "n", path), sub(path, "n"));
  const int out = static_cast<int>(integer(field(j, "s", path), sub(path, "s")));
  if (static_cast<int>(n.size()) != s.k()) throw JsonError(sub(path, "n"), "need one entry per block");
  for (std::size_t r = 0; r < n.size(); ++r)
    if (n[r] < 0) throw JsonError(at(sub(path, "n"), r), "must be nonnegative");
  const int M = inflated_side(s, n);
  auto mat = [&](const char* key) { return matrix_from_json(field(j, key, path), sub(path, key)); };
  try {
    return Colligation(s, n, out, shaped(mat("A"), M, M), shaped(mat("B"), M, out), shaped(mat("C"), out, M),
                       mat("D"));
  } catch (const Error& e) {
    throw JsonError(path, e.what());
  }
}

Json to_json(const GramCertificate& c) {
  Json mons = Json::array();
  for (const auto& e : c.monomials) mons.push_back(exponent_json(c.structure, e));
  Json M = Json::array();
  for (const auto& m : c.M) M.push_back(to_json(m));
  Json G = Json::array();
  for (const auto& gr : c.G) {
    Json row = Json::array();
    for (const auto& m : gr) row.push_back(to_json(m));
    G.push_back(std::move(row));
  }
  return Json{{"ell", to_json(c.structure)}, {"s", c.s},        {"g", c.g},
              {"n", c.n},                    {"monomials", mons}, {"M", M},
              {"G", G},                      {"residual", c.residual}, {"iterations", c.iterations}};
}

GramCertificate gram_certificate_from_json(const Json& j, const std::string& path) {
  GramCertificate c;
  c.structure = structure_from_json(j, path);
  c.s = static_cast<int>(integer(field(j, "s", path), sub(path, "s")));
  c.g = static_cast<int>(integer(field(j, "g", path), sub(path, "g")));
  c.n = int_list(field(j, "n", path), sub(path, "n"));
  if (static_cast<int>(c.n.size()) != c.structure.k()) throw JsonError(sub(path, "n"), "need one entry per block");
  c.monomials = monomials_up_to(c.structure.d(), c.g - 1);
  const std::string mp = sub(path, "M");
  const Json& mj = array(field(j, "M", path), mp);
  for (std::size_t r = 0; r < mj.size(); ++r) c.M.push_back(matrix_from_json(mj[r], at(mp, r)));
  const std::string gp = sub(path, "G");
  const Json& gj = array(field(j, "G", path), gp);
  if (gj.size() != c.n.size() || mj.size() != c.n.size()) throw JsonError(path, "M and G need one entry per block");
  for (std::size_t r = 0; r < gj.size(); ++r) {
    std::vector<CMatrix> gr;
    const Json& rj = array(gj[r], at(gp, r));
    if (rj.size() != c.monomials.size()) throw JsonError(at(gp, r), "wrong number of monomial coefficients");
    for (std::size_t a = 0; a < rj.size(); ++a)
      gr.push_back(shaped(matrix_from_json(rj[a], at(at(gp, r), a)),
                          static_cast<Eigen::Index>(c.structure.ell(static_cast<int>(r)) * c.n[r]), c.s));
    c.G.push_back(std::move(gr));
  }
  c.residual = number(field(j, "residual", path), sub(path, "residual"));
  c.iterations = static_cast<long>(integer(field(j, "iterations", path), sub(path, "iterations")));
  return c;
}

Json to_json(const DetRepCertificate& c) {
  return Json{{"ell", to_json(c.structure)},
              {"p", terms_json(c.p)},
              {"n", c.n},
              {"K", to_json(c.K)},
              {"v", terms_json(c.v)},
              {"gamma", to_json(c.gamma)},
              {"s", c.s},
              {"p_degrees", c.p_degrees},
              {"v_degrees", c.v_degrees},
              {"residuals",
               {{"division", c.division_residual},
                {"self_reversive", c.self_reversive_residual},
                {"contractivity_margin", c.contractivity_margin}}}};
}

DetRepCertificate detrep_from_json(const Json& j, const std::string& path) {
  DetRepCertificate c;
  c.structure = structure_from_json(j, path);
  c.p = terms_from_json(c.structure, field(j, "p", path), sub(path, "p"));
  c.v = terms_from_json(c.structure, field(j, "v", path), sub(path, "v"));
  c.n = int_list(field(j, "n", path), sub(path, "n"));
  if (static_cast<int>(c.n.size()) != c.structure.k()) throw JsonError(sub(path, "n"), "need one entry per block");
  for (std::size_t r = 0; r < c.n.size(); ++r)
    if (c.n[r] < 0) throw JsonError(at(sub(path, "n"), r), "must be nonnegative");
  const Eigen::Index M = inflated_side(c.structure, c.n);
  c.K = shaped(matrix_from_json(field(j, "K", path), sub(path, "K")), M, M);
  c.gamma = complex_from_json(field(j, "gamma", path), sub(path, "gamma"));
  c.s = int_list(field(j, "s", path), sub(path, "s"));
  c.p_degrees = int_list(field(j, "p_degrees", path), sub(path, "p_degrees"));
  c.v_degrees = int_list(field(j, "v_degrees", path), sub(path, "v_degrees"));
  const std::string rp = sub(path, "residuals");
  const Json& rj = field(j, "residuals", path);
  c.division_residual = number(field(rj, "division", rp), sub(rp, "division"));
  c.self_reversive_residual = number(field(rj, "self_reversive", rp), sub(rp, "self_reversive"));
  c.contractivity_margin = number(field(rj, "contractivity_margin", rp), sub(rp, "contractivity_margin"));
  return c;
}

Json to_json(const ColligationReport& r) {
  return Json{{"verdict", r.pass() ? "Pass" : "Fail"},
              {"unitary_defect", r.unitary_defect},
              {"unitary", r.unitary},
              {"shilov_samples", r.shilov_samples},
              {"max_inner_defect", r.max_inner_defect},
              {"inner", r.inner},
              {"tuple_samples", r.tuple_samples},
              {"tuples_skipped", r.tuples_skipped},
              {"max_tuple_norm", r.max_tuple_norm},
              {"schur_agler", r.schur_agler}};
}

Json to_json(const PqReport& r) {
  return Json{{"verdict", r.pass ? "Pass" : "Fail"}, {"trials", r.trials}, {"max_deviation", r.max_deviation}};
}

Json to_json(const CertificateReport& r) {
  return Json{{"verdict", r.verdict()},
              {"contractive", r.contractive},
              {"divisible", r.divisible},
              {"self_reversive", r.self_reversive},
              {"shifts_ok", r.shifts_ok},
              {"pointwise", r.pointwise},
              {"inner", r.inner},
              {"norm_K", r.norm_K},
              {"division_residual", r.division_residual},
              {"quotient_mismatch", r.quotient_mismatch},
              {"self_reversive_residual", r.self_reversive_residual},
              {"gamma_mismatch", r.gamma_mismatch},
              {"max_point_error", r.max_point_error},
              {"max_inner_defect", r.max_inner_defect},
              {"failures", r.failures}};
}

Json to_json(const SearchResult& r) {
  return Json{{"verdict", r.found() ? "Success" : "NotFound"},
              {"best_residual", r.best_residual},
              {"starts_used", r.starts_used},
              {"message", r.message},
              {"certificate", optional_json(r.certificate)}};
}

Json to_json(const InnerReport& r) {
  return Json{{"verdict", r.verdict},
              {"samples", r.samples},
              {"near_singular", r.near_singular},
              {"near_singular_fraction", r.near_singular_fraction},
              {"max_defect", r.max_defect}};
}

Json to_json(const RudinResult& r) {
  return Json{{"verdict", r.ok ? "Success" : "NotInnerForm"},
              {"m", r.m},
              {"gamma", to_json(r.gamma)},
              {"residual", r.residual},
              {"p_degrees", r.p_degrees},
              {"core", to_json(r.core)},
              {"reversed", to_json(r.reversed)},
              {"message", r.message}};
}

Json to_json(const StabilityReport& r) {
  return Json{{"verdict", r.verdict},
              {"mode", to_string(r.mode)},
              {"min_abs", r.min_abs},
              {"argmin", optional_json(r.argmin)},
              {"argmin_class", r.argmin_class},
              {"budget", r.budget},
              {"polished", r.polished},
              {"radius", r.radius}};
}

Json to_json(const AglerBoundReport& r) {
  return Json{{"verdict", r.verdict},
              {"bound", r.bound},
              {"tried", r.tried},
              {"skipped", r.skipped},
              {"N_range", Json::array({r.N_min, r.N_max})},
              {"witness_N", r.witness_N},
              {"witness_index", r.witness_index},
              {"witness_family", r.witness_family},
              {"witness", optional_json(r.witness)}};
}

Json to_json(const GramResult& r) {
  return Json{{"verdict", r.feasible ? "Feasible" : "Infeasible"},
              {"best_residual", r.best_residual},
              {"iterations", r.iterations},
              {"message", r.message},
              {"certificate", optional_json(r.certificate)}};
}

Json to_json(const LurkingResult& r) {
  return Json{{"gram_defect", r.gram_defect},
              {"transfer_error", r.transfer_error},
              {"samples", r.samples},
              {"colligation", to_json(r.colligation)}};
}

Json to_json(const SynthesisResult& r) {
  Json bounds = Json::array();
  if (r.gram.certificate)
    for (int k = 0; k < r.gram.certificate->structure.k(); ++k)
      bounds.push_back(r.gram.certificate->dimension_bound(k));
  return Json{{"verdict", r.verdict},
              {"boundary", {{"samples", r.boundary.samples}, {"max_defect", r.boundary.max_defect}, {"pass", r.boundary.pass}}},
              {"dimension_bounds", bounds},
              {"gram", to_json(r.gram)},
              {"realization", optional_json(r.realization)}};
}

Json to_json(const LiftResult& r) {
  return Json{{"verdict", r.verdict},
              {"message", r.message},
              {"s", r.s},
              {"best_residual", r.best_residual},
              {"rudin", optional_json(r.rudin)},
              {"stability", optional_json(r.stability)},
              {"certificate", optional_json(r.certificate)},
              {"synthesis", optional_json(r.synthesis)}};
}

Json read_json_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw JsonError(file, "cannot open file");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw JsonError(file, std::string("parse error: ") + e.what());
  }
}

void write_text_atomic(const std::string& file, const std::string& text) {
  const std::string tmp = file + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp);
    out << text;
    if (!out) throw Error("write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), file.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw Error("cannot move " + tmp + " to " + file);
  }
}

}  // namespace polyball
