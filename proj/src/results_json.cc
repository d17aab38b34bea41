#include <fmt/format.h>

#include "json_util.h"
#include "maro/error.h"
#include "maro/serialization.h"

namespace maro {

using json_util::Fail;
using json_util::Field;

namespace {

std::string Sub(const std::string& path, const char* key) { return path + "/" + key; }

VectorXd Vec(const Json& j, const std::string& path, const char* key) {
  return VectorFromJson(Field(j, path, key), Sub(path, key));
}

double Num(const Json& j, const std::string& path, const char* key) {
  return NumberFromJson(Field(j, path, key), Sub(path, key));
}

Json MatrixToJson(const MatrixXd& m) {
  Json out = Json::array();
  for (int r = 0; r < m.rows(); ++r) out.push_back(VectorToJson(m.row(r).transpose()));
  return out;
}

MatrixXd MatrixFromJson(const Json& j, const std::string& path, int cols) {
  if (!j.is_array()) Fail(path, "array of rows expected");
  MatrixXd m(j.size(), cols);
  for (size_t r = 0; r < j.size(); ++r) {
    const std::string p = fmt::format("{}/{}", path, r);
    const VectorXd row = VectorFromJson(j[r], p);
    if (row.size() != cols) Fail(p, fmt::format("row needs {} entries", cols));
    m.row(r) = row.transpose();
  }
  return m;
}

Json VectorsToJson(const std::vector<VectorXd>& vs) {
  Json out = Json::array();
  for (const VectorXd& v : vs) out.push_back(VectorToJson(v));
  return out;
}

std::vector<VectorXd> VectorsFromJson(const Json& j, const std::string& path) {
  if (!j.is_array()) Fail(path, "array expected");
  std::vector<VectorXd> out;
  for (size_t i = 0; i < j.size(); ++i) out.push_back(VectorFromJson(j[i], fmt::format("{}/{}", path, i)));
  return out;
}

NlpStatus ParseStatus(const Json& j, const std::string& path) {
  const std::string s = json_util::String(j, path);
  for (NlpStatus st : {NlpStatus::kOptimal, NlpStatus::kFeasibleSuboptimal, NlpStatus::kInfeasible,
                       NlpStatus::kIterationLimit}) {
    if (s == NlpStatusName(st)) return st;
  }
  Fail(path, fmt::format("unknown solver status '{}'", s));
}

SolveMode ParseMode(const Json& j, const std::string& path) {
  try {
    return ParseSolveMode(json_util::String(j, path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kSchema) throw;
    Fail(path, e.what());
  }
}

Json LambdaToJson(const std::vector<std::pair<int, double>>& lambda) {
  Json out = Json::array();
  for (const auto& [i, l] : lambda) out.push_back({{"point", i}, {"weight", l}});
  return out;
}

std::vector<std::pair<int, double>> LambdaFromJson(const Json& j, const std::string& path) {
  if (!j.is_array()) Fail(path, "array expected");
  std::vector<std::pair<int, double>> out;
  for (size_t i = 0; i < j.size(); ++i) {
    const std::string p = fmt::format("{}/{}", path, i);
    out.emplace_back(static_cast<int>(json_util::Int(Field(j[i], p, "point"), p + "/point")),
                     Num(j[i], p, "weight"));
  }
  return out;
}

}  // namespace

Json ToJson(const ReferenceDiscretization& d) {
  Json out;
  out["rule"] = d.rule();
  out["scenarios"] = Json::array();
  for (const Scenario& s : d.scenarios()) {
    out["scenarios"].push_back({{"id", s.id},
                                {"values", VectorToJson(s.values)},
                                {"nominal", s.is_nominal},
                                {"label", s.label}});
  }
  return out;
}

ReferenceDiscretization DiscretizationFromJson(const Json& j) {
  const std::string path = "/discretization";
  const Json& arr = Field(j, path, "scenarios");
  if (!arr.is_array()) Fail(path + "/scenarios", "array expected");
  std::vector<Scenario> scenarios;
  for (size_t i = 0; i < arr.size(); ++i) {
    const std::string p = fmt::format("{}/scenarios/{}", path, i);
    Scenario s;
    s.id = static_cast<int>(json_util::Int(Field(arr[i], p, "id"), p + "/id"));
    s.values = Vec(arr[i], p, "values");
    s.is_nominal = json_util::Bool(Field(arr[i], p, "nominal"), p + "/nominal");
    s.label = json_util::String(Field(arr[i], p, "label"), p + "/label");
    scenarios.push_back(std::move(s));
  }
  try {
    return ReferenceDiscretization(std::move(scenarios),
                                   json_util::String(Field(j, path, "rule"), path + "/rule"));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kSchema) throw;
    Fail(path, e.what());
  }
}

Json ToJson(const ScalarizationSpec& s) {
  return {{"weights", VectorToJson(s.weights)}, {"caps", VectorToJson(s.caps)}};
}

ScalarizationSpec ScalarizationFromJson(const Json& j, const std::string& path) {
  ScalarizationSpec s;
  s.weights = Vec(j, path, "weights");
  s.caps = Vec(j, path, "caps");
  return s;
}

Json ToJson(const ReplicatedSolution& s) {
  Json out;
  out["mode"] = SolveModeName(s.mode);
  out["x"] = VectorToJson(s.x);
  out["scenario_ids"] = s.scenario_ids;
  out["y"] = VectorsToJson(s.y);
  out["t"] = VectorToJson(s.t);
  out["f"] = MatrixToJson(s.f);
  out["g"] = MatrixToJson(s.g);
  out["active_objective"] = s.active_objective;
  out["active_constraint"] = s.active_constraint;
  out["status"] = NlpStatusName(s.status);
  out["max_violation"] = NumberToJson(s.max_violation);
  out["iterations"] = s.iterations;
  out["nlp_variables"] = s.nlp_variables;
  return out;
}

ReplicatedSolution SolutionFromJson(const Json& j, const std::string& path) {
  ReplicatedSolution s;
  s.mode = ParseMode(Field(j, path, "mode"), Sub(path, "mode"));
  s.x = Vec(j, path, "x");
  s.scenario_ids = json_util::IntArray(Field(j, path, "scenario_ids"), Sub(path, "scenario_ids"));
  s.y = VectorsFromJson(Field(j, path, "y"), Sub(path, "y"));
  s.t = Vec(j, path, "t");
  const int k = static_cast<int>(s.scenario_ids.size());
  s.f = MatrixFromJson(Field(j, path, "f"), Sub(path, "f"), k);
  s.g = MatrixFromJson(Field(j, path, "g"), Sub(path, "g"), k);
  s.active_objective =
      json_util::IntArray(Field(j, path, "active_objective"), Sub(path, "active_objective"));
  s.active_constraint =
      json_util::IntArray(Field(j, path, "active_constraint"), Sub(path, "active_constraint"));
  s.status = ParseStatus(Field(j, path, "status"), Sub(path, "status"));
  s.max_violation = Num(j, path, "max_violation");
  s.iterations = static_cast<int>(json_util::Int(Field(j, path, "iterations"), Sub(path, "iterations")));
  s.nlp_variables =
      static_cast<int>(json_util::Int(Field(j, path, "nlp_variables"), Sub(path, "nlp_variables")));
  return s;
}

Json ToJson(const ParetoPoint& p) {
  return {{"objectives", VectorToJson(p.objectives)},
          {"solution", ToJson(p.solution)},
          {"scalarization", ToJson(p.scalarization)},
          {"scenario_set_ids", p.scenario_set_ids}};
}

ParetoPoint PointFromJson(const Json& j, const std::string& path) {
  ParetoPoint p;
  p.objectives = Vec(j, path, "objectives");
  p.solution = SolutionFromJson(Field(j, path, "solution"), Sub(path, "solution"));
  p.scalarization = ScalarizationFromJson(Field(j, path, "scalarization"), Sub(path, "scalarization"));
  p.scenario_set_ids =
      json_util::IntArray(Field(j, path, "scenario_set_ids"), Sub(path, "scenario_set_ids"));
  return p;
}

Json ToJson(const FrontApproximation& f) {
  Json out;
  out["mode"] = SolveModeName(f.mode);
  out["points"] = Json::array();
  for (const ParetoPoint& p : f.points) out["points"].push_back(ToJson(p));
  out["normalization"] = {{"ideal", VectorToJson(f.normalization.ideal)},
                          {"nadir", VectorToJson(f.normalization.nadir)}};
  out["segment_gaps"] = VectorToJson(Eigen::Map<const VectorXd>(
      f.segment_gaps.data(), static_cast<Eigen::Index>(f.segment_gaps.size())));
  out["segment_certified"] = Json::array();
  for (bool b : f.segment_certified) out["segment_certified"].push_back(b);
  out["max_gap"] = NumberToJson(f.max_gap);
  out["gap_history"] = VectorToJson(Eigen::Map<const VectorXd>(
      f.gap_history.data(), static_cast<Eigen::Index>(f.gap_history.size())));
  out["warnings"] = f.warnings;
  out["solves"] = f.solves;
  out["left_support"] = VectorsToJson(f.left_support);
  out["right_support"] = VectorsToJson(f.right_support);
  out["support_valid"] = Json::array();
  for (bool b : f.support_valid) out["support_valid"].push_back(b);
  return out;
}

FrontApproximation FrontFromJson(const Json& j, const std::string& path) {
  FrontApproximation f;
  f.mode = ParseMode(Field(j, path, "mode"), Sub(path, "mode"));
  const Json& pts = Field(j, path, "points");
  if (!pts.is_array()) Fail(Sub(path, "points"), "array expected");
  for (size_t i = 0; i < pts.size(); ++i) {
    f.points.push_back(PointFromJson(pts[i], fmt::format("{}/points/{}", path, i)));
  }
  const Json& n = Field(j, path, "normalization");
  f.normalization.ideal = Vec(n, Sub(path, "normalization"), "ideal");
  f.normalization.nadir = Vec(n, Sub(path, "normalization"), "nadir");
  const VectorXd gaps = Vec(j, path, "segment_gaps");
  f.segment_gaps.assign(gaps.data(), gaps.data() + gaps.size());
  const Json& cert = Field(j, path, "segment_certified");
  if (!cert.is_array()) Fail(Sub(path, "segment_certified"), "array expected");
  for (size_t i = 0; i < cert.size(); ++i) {
    f.segment_certified.push_back(
        json_util::Bool(cert[i], fmt::format("{}/segment_certified/{}", path, i)));
  }
  f.max_gap = Num(j, path, "max_gap");
  const VectorXd hist = Vec(j, path, "gap_history");
  f.gap_history.assign(hist.data(), hist.data() + hist.size());
  const Json& warn = Field(j, path, "warnings");
  if (!warn.is_array()) Fail(Sub(path, "warnings"), "array expected");
  for (size_t i = 0; i < warn.size(); ++i) {
    f.warnings.push_back(json_util::String(warn[i], fmt::format("{}/warnings/{}", path, i)));
  }
  f.solves = static_cast<int>(json_util::Int(Field(j, path, "solves"), Sub(path, "solves")));
  f.left_support = VectorsFromJson(Field(j, path, "left_support"), Sub(path, "left_support"));
  f.right_support = VectorsFromJson(Field(j, path, "right_support"), Sub(path, "right_support"));
  const Json& valid = Field(j, path, "support_valid");
  if (!valid.is_array()) Fail(Sub(path, "support_valid"), "array expected");
  for (size_t i = 0; i < valid.size(); ++i) {
    f.support_valid.push_back(json_util::Bool(valid[i], fmt::format("{}/support_valid/{}", path, i)));
  }
  if (f.segment_gaps.size() != f.segment_certified.size() ||
      (!f.points.empty() && f.segment_gaps.size() + 1 != f.points.size())) {
    Fail(Sub(path, "segment_gaps"), "needs one entry per segment");
  }
  return f;
}

Json ToJson(const PriceReport& r) {
  Json out;
  out["x_star"] = VectorToJson(r.x_star);
  out["preference"] = ToJson(r.preference);
  out["f_maro"] = VectorToJson(r.f_maro);
  out["f_nsr"] = VectorToJson(r.f_nsr);
  out["y_nsr"] = VectorToJson(r.y_nsr);
  out["d"] = VectorToJson(r.d);
  out["alpha_star"] = NumberToJson(r.alpha_star);
  out["f_mo"] = VectorToJson(r.f_mo);
  out["p_r"] = VectorToJson(r.p_r);
  out["segment"] = r.segment;
  out["lambda"] = LambdaToJson(r.lambda);
  out["d_zero"] = r.d_zero;
  out["ray_misses_front"] = r.ray_misses_front;
  return out;
}

PriceReport PriceReportFromJson(const Json& j, const std::string& path) {
  PriceReport r;
  r.x_star = Vec(j, path, "x_star");
  r.preference = ScalarizationFromJson(Field(j, path, "preference"), Sub(path, "preference"));
  r.f_maro = Vec(j, path, "f_maro");
  r.f_nsr = Vec(j, path, "f_nsr");
  r.y_nsr = Vec(j, path, "y_nsr");
  r.d = Vec(j, path, "d");
  r.alpha_star = Num(j, path, "alpha_star");
  r.f_mo = Vec(j, path, "f_mo");
  r.p_r = Vec(j, path, "p_r");
  r.segment = static_cast<int>(json_util::Int(Field(j, path, "segment"), Sub(path, "segment")));
  r.lambda = LambdaFromJson(Field(j, path, "lambda"), Sub(path, "lambda"));
  r.d_zero = json_util::Bool(Field(j, path, "d_zero"), Sub(path, "d_zero"));
  r.ray_misses_front =
      json_util::Bool(Field(j, path, "ray_misses_front"), Sub(path, "ray_misses_front"));
  return r;
}

Json ToJson(const RefinementTrace& t) {
  Json out;
  out["iterations"] = Json::array();
  for (const RefinementIteration& it : t.iterations) {
    out["iterations"].push_back({{"objectives", VectorToJson(it.objectives)},
                                 {"scenario_ids", it.scenario_ids},
                                 {"added", it.added},
                                 {"objective_wc_values", VectorToJson(it.objective_wc_values)},
                                 {"objective_wc_ids", it.objective_wc_ids},
                                 {"constraint_wc_violations",
                                  VectorToJson(it.constraint_wc_violations)},
                                 {"status", NlpStatusName(it.status)}});
  }
  out["terminated"] = TerminationName(t.terminated);
  Json prov = Json::object();
  for (const auto& [id, why] : t.final_set.provenance) prov[std::to_string(id)] = why;
  out["final_set"] = {{"ids", t.final_set.ids}, {"provenance", prov}};
  out["replicated_work"] = t.replicated_work;
  return out;
}

RefinementTrace TraceFromJson(const Json& j, const std::string& path) {
  RefinementTrace t;
  const Json& its = Field(j, path, "iterations");
  if (!its.is_array()) Fail(Sub(path, "iterations"), "array expected");
  for (size_t i = 0; i < its.size(); ++i) {
    const std::string p = fmt::format("{}/iterations/{}", path, i);
    RefinementIteration it;
    it.objectives = Vec(its[i], p, "objectives");
    it.scenario_ids = json_util::IntArray(Field(its[i], p, "scenario_ids"), Sub(p, "scenario_ids"));
    it.added = json_util::IntArray(Field(its[i], p, "added"), Sub(p, "added"));
    it.objective_wc_values = Vec(its[i], p, "objective_wc_values");
    it.objective_wc_ids =
        json_util::IntArray(Field(its[i], p, "objective_wc_ids"), Sub(p, "objective_wc_ids"));
    it.constraint_wc_violations = Vec(its[i], p, "constraint_wc_violations");
    it.status = ParseStatus(Field(its[i], p, "status"), Sub(p, "status"));
    t.iterations.push_back(std::move(it));
  }
  const std::string term = json_util::String(Field(j, path, "terminated"), Sub(path, "terminated"));
  if (term == TerminationName(Termination::kNoNewScenarios)) {
    t.terminated = Termination::kNoNewScenarios;
  } else if (term == TerminationName(Termination::kIterationCap)) {
    t.terminated = Termination::kIterationCap;
  } else {
    Fail(Sub(path, "terminated"), fmt::format("unknown termination '{}'", term));
  }
  const std::string fp = Sub(path, "final_set");
  const Json& fs = Field(j, path, "final_set");
  t.final_set.ids = json_util::IntArray(Field(fs, fp, "ids"), Sub(fp, "ids"));
  const Json& prov = Field(fs, fp, "provenance");
  if (!prov.is_object()) Fail(Sub(fp, "provenance"), "object expected");
  for (const auto& [key, why] : prov.items()) {
    const std::string p = Sub(fp, "provenance") + "/" + key;
    int id = 0;
    try {
      size_t used = 0;
      id = std::stoi(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      Fail(p, "key must be a scenario id");
    }
    t.final_set.provenance[id] = json_util::String(why, p);
  }
  t.replicated_work = json_util::Int(Field(j, path, "replicated_work"), Sub(path, "replicated_work"));
  return t;
}

Json ToJson(const RunArtifact& a) {
  Json out;
  out["format"] = "maro-artifact";
  out["tool_version"] = a.tool_version;
  out["created_at"] = a.created_at;
  out["problem_hash"] = a.problem_hash;
  out["problem"] = a.problem;
  out["settings"] = a.settings;
  out["discretization"] = ToJson(a.discretization);
  out["fronts"] = Json::object();
  for (const auto& [key, f] : a.fronts) out["fronts"][key] = ToJson(f);
  out["prices"] = Json::array();
  for (const PriceReport& r : a.prices) out["prices"].push_back(ToJson(r));
  out["traces"] = Json::array();
  for (const RefinementTrace& t : a.traces) out["traces"].push_back(ToJson(t));
  return out;
}

RunArtifact ArtifactFromJson(const Json& j) {
  if (!j.is_object()) Fail("", "artifact must be an object");
  if (json_util::String(Field(j, "", "format"), "/format") != "maro-artifact") {
    Fail("/format", "expected 'maro-artifact'");
  }
  RunArtifact a;
  a.tool_version = json_util::String(Field(j, "", "tool_version"), "/tool_version");
  a.created_at = json_util::String(Field(j, "", "created_at"), "/created_at");
  a.problem_hash = json_util::String(Field(j, "", "problem_hash"), "/problem_hash");
  a.problem = Field(j, "", "problem");
  if (ProblemHash(a.problem) != a.problem_hash) {
    Fail("/problem_hash", "does not match the embedded problem document");
  }
  a.settings = Field(j, "", "settings");
  a.discretization = DiscretizationFromJson(Field(j, "", "discretization"));
  const Json& fronts = Field(j, "", "fronts");
  if (!fronts.is_object()) Fail("/fronts", "object expected");
  for (const auto& [key, f] : fronts.items()) a.fronts[key] = FrontFromJson(f, "/fronts/" + key);
  const Json& prices = Field(j, "", "prices");
  if (!prices.is_array()) Fail("/prices", "array expected");
  for (size_t i = 0; i < prices.size(); ++i) {
    a.prices.push_back(PriceReportFromJson(prices[i], fmt::format("/prices/{}", i)));
  }
  const Json& traces = Field(j, "", "traces");
  if (!traces.is_array()) Fail("/traces", "array expected");
  for (size_t i = 0; i < traces.size(); ++i) {
    a.traces.push_back(TraceFromJson(traces[i], fmt::format("/traces/{}", i)));
  }
  return a;
}

RunArtifact LoadArtifact(const std::string& path) {
  LineIndex lines;
  const Json doc = ReadJsonFile(path, &lines);
  return WithFileContext(path, lines, [&] { return ArtifactFromJson(doc); });
}

void SaveArtifact(const std::string& path, const RunArtifact& a) {
  WriteJsonFile(path, ToJson(a));
}

NavigationData NavigationFromArtifact(const RunArtifact& a) {
  const auto maro = a.fronts.find("maro");
  const auto nominal = a.fronts.find("nominal");
  if (maro == a.fronts.end() || nominal == a.fronts.end()) {
    Fail("/fronts", "navigation needs the 'maro' and 'nominal' fronts");
  }
  const ProblemSpec spec = ProblemFromJson(a.problem);
  return MakeNavigationData(spec, maro->second, nominal->second, a.prices);
}

}  // namespace maro
