#ifndef MARO_SERIALIZATION_H_
#define MARO_SERIALIZATION_H_

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "maro/adaptive.h"
#include "maro/error.h"
#include "maro/navigation.h"
#include "maro/pareto_front.h"
#include "maro/price.h"

namespace maro {

using Json = nlohmann::json;

inline constexpr const char* kToolVersion = "0.3.0";

// Doubles are written as JSON numbers (shortest round-trip form); the
// non-finite values become the strings "inf", "-inf" and "nan".
Json NumberToJson(double v);
double NumberFromJson(const Json& j, const std::string& path);
Json VectorToJson(const VectorXd& v);
VectorXd VectorFromJson(const Json& j, const std::string& path);

// ---- Files ---------------------------------------------------------------

// Maps JSON pointers of a document to the 1-based line where their value
// starts.
class LineIndex {
 public:
  LineIndex() = default;
  explicit LineIndex(const std::string& text);
  // Line of the pointer or of its closest recorded ancestor; 0 if unknown.
  int LineOf(const std::string& pointer) const;

 private:
  std::map<std::string, int> lines_;
};

// Parses a JSON file. Syntax errors are reported as kSchema with
// "file:line:column: message".
Json ReadJsonFile(const std::string& path, LineIndex* lines = nullptr);
void WriteJsonFile(const std::string& path, const Json& doc);

// Runs `fn`, prefixing any kSchema error of the form "<pointer>: message"
// with "file:line: ".
template <typename Fn>
auto WithFileContext(const std::string& file, const LineIndex& lines, Fn&& fn) -> decltype(fn());

// ---- Problems ------------------------------------------------------------

// Builds a problem from its JSON document. The model is either a built-in
// ({"builtin": name}; variables and uncertain_params may then override
// bounds, initial and nominal values by name) or an expression model
// ({"objectives": [...], "constraints": [...]}). Errors are kSchema with a
// JSON-pointer path.
ProblemSpec ProblemFromJson(const Json& doc);
ProblemSpec LoadProblemFile(const std::string& path, Json* doc = nullptr);
// Full document of a built-in problem; throws kUsage for unknown names.
Json BuiltinProblemDocument(const std::string& name);
// Hex SHA-256 of the canonical serialization.
std::string ProblemHash(const Json& doc);

// ---- Results -------------------------------------------------------------

Json ToJson(const ReferenceDiscretization& d);
ReferenceDiscretization DiscretizationFromJson(const Json& j);
Json ToJson(const ScalarizationSpec& s);
ScalarizationSpec ScalarizationFromJson(const Json& j, const std::string& path);
Json ToJson(const ReplicatedSolution& s);
ReplicatedSolution SolutionFromJson(const Json& j, const std::string& path);
Json ToJson(const ParetoPoint& p);
ParetoPoint PointFromJson(const Json& j, const std::string& path);
Json ToJson(const FrontApproximation& f);
FrontApproximation FrontFromJson(const Json& j, const std::string& path = "");
Json ToJson(const PriceReport& r);
PriceReport PriceReportFromJson(const Json& j, const std::string& path = "");
Json ToJson(const RefinementTrace& t);
RefinementTrace TraceFromJson(const Json& j, const std::string& path = "");

struct RunArtifact {
  std::string tool_version = kToolVersion;
  std::string created_at;  // ISO 8601, UTC
  std::string problem_hash;
  Json problem;  // the full problem document
  Json settings = Json::object();
  ReferenceDiscretization discretization;
  // Keys: "nominal", "maro", "mro", "scenario:<id>".
  std::map<std::string, FrontApproximation> fronts;
  // One per point of fronts["maro"], in front order; carries the NSR values.
  std::vector<PriceReport> prices;
  std::vector<RefinementTrace> traces;
};

Json ToJson(const RunArtifact& a);
RunArtifact ArtifactFromJson(const Json& j);
RunArtifact LoadArtifact(const std::string& path);
void SaveArtifact(const std::string& path, const RunArtifact& a);

// Navigation data from an artifact alone (needs the "maro" and "nominal"
// fronts and one price report per MARO point; kMissingNsr otherwise).
NavigationData NavigationFromArtifact(const RunArtifact& a);

// ---- Session messages ----------------------------------------------------

struct SessionCommand {
  enum class Kind { kMove, kRestrict, kReset };
  Kind kind = Kind::kReset;
  int objective = -1;
  double value = 0.0;
};

// {command: move|restrict|reset, objective: name, value: number}. Errors are
// kSchema with the offending field's pointer.
SessionCommand CommandFromJson(const Json& j, const NavigationData& data);
Json ToJson(const SessionSnapshot& s, const NavigationData& data);

// ---- Implementation ------------------------------------------------------

std::string PrefixWithLine(const std::string& file, const LineIndex& lines,
                           const std::string& message);

template <typename Fn>
auto WithFileContext(const std::string& file, const LineIndex& lines, Fn&& fn)
    -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kSchema) throw;
    throw Error(ErrorKind::kSchema, PrefixWithLine(file, lines, e.what()));
  }
}

}  // namespace maro

#endif  // MARO_SERIALIZATION_H_
