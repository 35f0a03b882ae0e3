#pragma once

#include <string>

#include <json.hpp>

#include "polyball/analysis.hpp"

namespace polyball {

/// Insertion-ordered so that written reports are byte-stable.
using Json = nlohmann::ordered_json;

/// Malformed input; the message starts with the offending JSON path.
class JsonError : public Error {
 public:
  JsonError(const std::string& path, const std::string& what) : Error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

Json to_json(const BlockStructure& s);
BlockStructure structure_from_json(const Json& j, const std::string& path = "$");

/// [[[re, im], ...], ...] row by row.
Json to_json(const CMatrix& m);
CMatrix matrix_from_json(const Json& j, const std::string& path = "$");
Json to_json(cplx c);
cplx complex_from_json(const Json& j, const std::string& path = "$");

Json to_json(const MatrixPoint& z);
MatrixPoint point_from_json(const Json& j, const std::string& path = "$");
Json to_json(const CommutingTuple& t);
CommutingTuple tuple_from_json(const Json& j, const std::string& path = "$");

/// {"ell": [...], "terms": [{"coeff": [re, im], "exps": {"z1_11": 2}}]}, leading term first.
Json to_json(const MPoly& p);
MPoly poly_from_json(const Json& j, const std::string& path = "$");
/// {"ell", "rows", "cols", "entries": [[{"terms": ...}]]}; a plain polynomial reads as 1 x 1.
Json to_json(const MatPoly& p);
MatPoly matpoly_from_json(const Json& j, const std::string& path = "$");

Json to_json(const Colligation& c);
Colligation colligation_from_json(const Json& j, const std::string& path = "$");
Json to_json(const GramCertificate& c);
GramCertificate gram_certificate_from_json(const Json& j, const std::string& path = "$");
Json to_json(const DetRepCertificate& c);
DetRepCertificate detrep_from_json(const Json& j, const std::string& path = "$");

Json to_json(const ColligationReport& r);
Json to_json(const PqReport& r);
Json to_json(const CertificateReport& r);
Json to_json(const SearchResult& r);
Json to_json(const InnerReport& r);
Json to_json(const RudinResult& r);
Json to_json(const StabilityReport& r);
Json to_json(const AglerBoundReport& r);
Json to_json(const GramResult& r);
Json to_json(const LurkingResult& r);
Json to_json(const SynthesisResult& r);
Json to_json(const LiftResult& r);

Json read_json_file(const std::string& file);
/// Writes through a temporary file and a rename.
void write_text_atomic(const std::string& file, const std::string& text);

}  // namespace polyball
