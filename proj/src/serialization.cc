#include "maro/serialization.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "maro/case_study.h"
#include "maro/error.h"
#include "maro/expression.h"
#include "json_util.h"

namespace maro {

using json_util::Fail;
using json_util::Field;

Json NumberToJson(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double NumberFromJson(const Json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  Fail(path, "number expected");
}

Json VectorToJson(const VectorXd& v) {
  Json out = Json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(NumberToJson(v[i]));
  return out;
}

VectorXd VectorFromJson(const Json& j, const std::string& path) {
  if (!j.is_array()) Fail(path, "array of numbers expected");
  VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[i] = NumberFromJson(j[i], fmt::format("{}/{}", path, i));
  return v;
}

// ---- Line index ----------------------------------------------------------

namespace {

std::string EscapePointer(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

}  // namespace

LineIndex::LineIndex(const std::string& text) {
  struct Frame {
    bool array;
    int index = 0;
    std::string key;
    bool expect_key = true;
  };
  std::vector<Frame> stack;
  int line = 1;
  auto pointer = [&] {
    std::string p;
    for (const Frame& f : stack) p += "/" + (f.array ? std::to_string(f.index) : EscapePointer(f.key));
    return p;
  };
  auto record = [&] { lines_.emplace(pointer(), line); };
  const size_t n = text.size();
  for (size_t i = 0; i < n; ++i) {
    const char c = text[i];
    switch (c) {
      case '\n': ++line; break;
      case ' ': case '\t': case '\r': case ':': break;
      case '{': record(); stack.push_back(Frame{false, 0, {}, true}); break;
      case '[': record(); stack.push_back(Frame{true, 0, {}, true}); break;
      case '}': case ']': if (!stack.empty()) stack.pop_back(); break;
      case ',':
        if (!stack.empty()) {
          if (stack.back().array) {
            ++stack.back().index;
          } else {
            stack.back().expect_key = true;
          }
        }
        break;
      case '"': {
        std::string s;
        for (++i; i < n && text[i] != '"'; ++i) {
          if (text[i] == '\\' && i + 1 < n) ++i;
          s += text[i];
        }
        if (!stack.empty() && !stack.back().array && stack.back().expect_key) {
          stack.back().key = s;
          stack.back().expect_key = false;
        } else {
          record();
        }
        break;
      }
      default:
        record();
        while (i + 1 < n && std::string(",]}\n \t\r").find(text[i + 1]) == std::string::npos) ++i;
    }
  }
}

int LineIndex::LineOf(const std::string& pointer) const {
  std::string p = pointer;
  while (true) {
    const auto it = lines_.find(p);
    if (it != lines_.end()) return it->second;
    if (p.empty()) return 0;
    p = p.substr(0, p.rfind('/'));
  }
}

std::string PrefixWithLine(const std::string& file, const LineIndex& lines,
                           const std::string& message) {
  std::string pointer = message.substr(0, message.find(": "));
  if (!pointer.empty() && pointer[0] != '/') pointer.clear();
  const int line = lines.LineOf(pointer);
  return line > 0 ? fmt::format("{}:{}: {}", file, line, message)
                  : fmt::format("{}: {}", file, message);
}

Json ReadJsonFile(const std::string& path, LineIndex* lines) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kUsage, fmt::format("{}: cannot open file", path));
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    const size_t at = std::min<size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    int line = 1, column = 1;
    for (size_t i = 0; i < at; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    // Drop nlohmann's "[json.exception.parse_error.101] parse error at
    // line L, column C: " prefix; the position is already in front.
    std::string what = e.what();
    const size_t cut = what.find(": ", what.find("parse error"));
    throw Error(ErrorKind::kSchema,
                fmt::format("{}:{}:{}: {}", path, line, column,
                            cut == std::string::npos ? what : what.substr(cut + 2)));
  }
  if (lines) *lines = LineIndex(text);
  return doc;
}

void WriteJsonFile(const std::string& path, const Json& doc) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kUsage, fmt::format("{}: cannot write file", path));
  out << doc.dump(1) << '\n';
}

// ---- Problems ------------------------------------------------------------

namespace {

VariableRole ParseRole(const Json& j, const std::string& path) {
  const std::string s = json_util::String(j, path);
  if (s == "here_and_now") return VariableRole::kHereAndNow;
  if (s == "wait_and_see") return VariableRole::kWaitAndSee;
  Fail(path, fmt::format("role must be 'here_and_now' or 'wait_and_see', got '{}'", s));
}

const char* RoleName(VariableRole r) {
  return r == VariableRole::kHereAndNow ? "here_and_now" : "wait_and_see";
}

std::vector<std::string> Names(const Json& doc, const char* key) {
  const std::string path = std::string("/") + key;
  const Json& arr = Field(doc, "", key);
  if (!arr.is_array()) Fail(path, "array of names expected");
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (size_t i = 0; i < arr.size(); ++i) {
    const std::string p = fmt::format("{}/{}", path, i);
    out.push_back(json_util::String(arr[i], p));
    if (!seen.insert(out.back()).second) Fail(p, fmt::format("duplicate name '{}'", out.back()));
  }
  return out;
}

void CheckVariable(const VariableSpec& v, const std::string& path) {
  if (!(v.lower < v.upper)) Fail(path, fmt::format("lower must be below upper for '{}'", v.name));
  if (v.initial < v.lower || v.initial > v.upper) {
    Fail(path + "/initial", fmt::format("initial value of '{}' is outside its bounds", v.name));
  }
}

void CheckParam(const UncertainParamSpec& p, const std::string& path) {
  if (!(p.lower <= p.nominal && p.nominal <= p.upper)) {
    Fail(path, fmt::format("'{}' needs lower <= nominal <= upper", p.name));
  }
}

VariableSpec ReadVariable(const Json& j, const std::string& path) {
  VariableSpec v;
  v.name = json_util::String(Field(j, path, "name"), path + "/name");
  v.lower = NumberFromJson(Field(j, path, "lower"), path + "/lower");
  v.upper = NumberFromJson(Field(j, path, "upper"), path + "/upper");
  v.role = ParseRole(Field(j, path, "role"), path + "/role");
  v.initial = j.contains("initial") ? NumberFromJson(j["initial"], path + "/initial")
                                    : 0.5 * (v.lower + v.upper);
  CheckVariable(v, path);
  return v;
}

UncertainParamSpec ReadParam(const Json& j, const std::string& path) {
  UncertainParamSpec p;
  p.name = json_util::String(Field(j, path, "name"), path + "/name");
  p.lower = NumberFromJson(Field(j, path, "lower"), path + "/lower");
  p.upper = NumberFromJson(Field(j, path, "upper"), path + "/upper");
  p.nominal = NumberFromJson(Field(j, path, "nominal"), path + "/nominal");
  CheckParam(p, path);
  return p;
}

void ReadGeometry(const Json& doc, UncertaintySet& set) {
  if (!doc.contains("geometry")) return;
  const std::string g = json_util::String(doc["geometry"], "/geometry");
  if (g == "box") {
    set.geometry = Geometry::kBox;
    set.center.resize(0);
    set.radii.resize(0);
    return;
  }
  if (g != "ellipsoid") Fail("/geometry", fmt::format("must be 'box' or 'ellipsoid', got '{}'", g));
  set.geometry = Geometry::kEllipsoid;
  const Json& e = Field(doc, "", "ellipsoid");
  set.center = VectorFromJson(Field(e, "/ellipsoid", "center"), "/ellipsoid/center");
  set.radii = VectorFromJson(Field(e, "/ellipsoid", "radii"), "/ellipsoid/radii");
  if (set.center.size() != set.dim() || set.radii.size() != set.dim()) {
    Fail("/ellipsoid", "center and radii need one entry per uncertain parameter");
  }
  for (int i = 0; i < set.dim(); ++i) {
    if (!(set.radii[i] > 0.0)) Fail(fmt::format("/ellipsoid/radii/{}", i), "radius must be positive");
    if (set.center[i] < set.params[i].lower || set.center[i] > set.params[i].upper) {
      Fail(fmt::format("/ellipsoid/center/{}", i), "center must lie within the parameter bounds");
    }
  }
}

ProblemSpec Construct(std::string name, std::vector<VariableSpec> vars, UncertaintySet set,
                      std::vector<std::string> objectives, std::vector<std::string> constraints,
                      std::shared_ptr<const Model> model) {
  try {
    return ProblemSpec(std::move(name), std::move(vars), std::move(set), std::move(objectives),
                       std::move(constraints), std::move(model));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kSchema) throw;
    Fail("", e.what());
  }
}

ProblemSpec BuiltinFromJson(const Json& doc, const std::string& builtin) {
  const std::optional<ProblemSpec> base = BuildBuiltin(builtin);
  if (!base) {
    std::string known;
    for (const std::string& n : BuiltinModelNames()) known += (known.empty() ? "" : ", ") + n;
    Fail("/model/builtin", fmt::format("unknown built-in model '{}' (known: {})", builtin, known));
  }
  std::vector<VariableSpec> vars = base->variables();
  UncertaintySet set = base->uncertainty();
  if (doc.contains("variables")) {
    const Json& arr = doc["variables"];
    if (!arr.is_array()) Fail("/variables", "array expected");
    for (size_t i = 0; i < arr.size(); ++i) {
      const std::string p = fmt::format("/variables/{}", i);
      const std::string name = json_util::String(Field(arr[i], p, "name"), p + "/name");
      auto it = std::find_if(vars.begin(), vars.end(), [&](auto& v) { return v.name == name; });
      if (it == vars.end()) Fail(p + "/name", fmt::format("model '{}' has no variable '{}'", builtin, name));
      if (arr[i].contains("role") && ParseRole(arr[i]["role"], p + "/role") != it->role) {
        Fail(p + "/role", fmt::format("the role of '{}' is fixed by the model", name));
      }
      if (arr[i].contains("lower")) it->lower = NumberFromJson(arr[i]["lower"], p + "/lower");
      if (arr[i].contains("upper")) it->upper = NumberFromJson(arr[i]["upper"], p + "/upper");
      if (arr[i].contains("initial")) it->initial = NumberFromJson(arr[i]["initial"], p + "/initial");
      CheckVariable(*it, p);
    }
  }
  if (doc.contains("uncertain_params")) {
    const Json& arr = doc["uncertain_params"];
    if (!arr.is_array()) Fail("/uncertain_params", "array expected");
    for (size_t i = 0; i < arr.size(); ++i) {
      const std::string p = fmt::format("/uncertain_params/{}", i);
      const std::string name = json_util::String(Field(arr[i], p, "name"), p + "/name");
      auto it = std::find_if(set.params.begin(), set.params.end(),
                             [&](auto& q) { return q.name == name; });
      if (it == set.params.end()) {
        Fail(p + "/name", fmt::format("model '{}' has no uncertain parameter '{}'", builtin, name));
      }
      if (arr[i].contains("lower")) it->lower = NumberFromJson(arr[i]["lower"], p + "/lower");
      if (arr[i].contains("upper")) it->upper = NumberFromJson(arr[i]["upper"], p + "/upper");
      if (arr[i].contains("nominal")) it->nominal = NumberFromJson(arr[i]["nominal"], p + "/nominal");
      CheckParam(*it, p);
    }
  }
  ReadGeometry(doc, set);
  for (const char* key : {"objectives", "constraints"}) {
    if (!doc.contains(key)) continue;
    const std::vector<std::string> given = Names(doc, key);
    const auto& expected =
        std::string(key) == "objectives" ? base->objective_names() : base->constraint_names();
    if (given != expected) {
      Fail(std::string("/") + key, fmt::format("names must match the built-in model '{}'", builtin));
    }
  }
  const std::string name =
      doc.contains("name") ? json_util::String(doc["name"], "/name") : base->name();
  return Construct(name, vars, set, base->objective_names(), base->constraint_names(),
                   base->shared_model());
}

}  // namespace

ProblemSpec ProblemFromJson(const Json& doc) {
  if (!doc.is_object()) Fail("", "problem document must be an object");
  const Json& model = Field(doc, "", "model");
  if (!model.is_object()) Fail("/model", "object expected");
  if (model.contains("builtin")) {
    return BuiltinFromJson(doc, json_util::String(model["builtin"], "/model/builtin"));
  }
  const std::string name = json_util::String(Field(doc, "", "name"), "/name");
  std::vector<VariableSpec> vars;
  const Json& va = Field(doc, "", "variables");
  if (!va.is_array()) Fail("/variables", "array expected");
  for (size_t i = 0; i < va.size(); ++i) vars.push_back(ReadVariable(va[i], fmt::format("/variables/{}", i)));
  UncertaintySet set;
  const Json& pa = Field(doc, "", "uncertain_params");
  if (!pa.is_array()) Fail("/uncertain_params", "array expected");
  for (size_t i = 0; i < pa.size(); ++i) {
    set.params.push_back(ReadParam(pa[i], fmt::format("/uncertain_params/{}", i)));
  }
  ReadGeometry(doc, set);
  const std::vector<std::string> objectives = Names(doc, "objectives");
  const std::vector<std::string> constraints =
      doc.contains("constraints") ? Names(doc, "constraints") : std::vector<std::string>{};
  const Json& ot = Field(model, "/model", "objectives");
  const Json empty = Json::array();
  const Json& ct = model.contains("constraints") ? model["constraints"] : empty;
  if (!ot.is_array() || ot.size() != objectives.size()) {
    Fail("/model/objectives", fmt::format("needs one expression per objective ({})", objectives.size()));
  }
  if (!ct.is_array() || ct.size() != constraints.size()) {
    Fail("/model/constraints",
         fmt::format("needs one expression per constraint ({})", constraints.size()));
  }
  ExpressionNames names;
  for (const VariableSpec& v : vars) {
    (v.role == VariableRole::kHereAndNow ? names.hnv : names.wsv).push_back(v.name);
  }
  for (const UncertainParamSpec& p : set.params) names.params.push_back(p.name);
  auto m = MakeExpressionModel(ot, ct, names, "/model");
  return Construct(name, vars, set, objectives, constraints, std::move(m));
}

ProblemSpec LoadProblemFile(const std::string& path, Json* doc) {
  LineIndex lines;
  Json d = ReadJsonFile(path, &lines);
  ProblemSpec spec = WithFileContext(path, lines, [&] { return ProblemFromJson(d); });
  if (doc) *doc = std::move(d);
  return spec;
}

Json BuiltinProblemDocument(const std::string& name) {
  const std::optional<ProblemSpec> spec = BuildBuiltin(name);
  if (!spec) throw Error(ErrorKind::kUsage, fmt::format("unknown built-in model '{}'", name));
  Json doc;
  doc["name"] = spec->name();
  doc["model"] = {{"builtin", name}};
  doc["variables"] = Json::array();
  for (const VariableSpec& v : spec->variables()) {
    doc["variables"].push_back({{"name", v.name},
                                {"lower", v.lower},
                                {"upper", v.upper},
                                {"role", RoleName(v.role)},
                                {"initial", v.initial}});
  }
  doc["uncertain_params"] = Json::array();
  for (const UncertainParamSpec& p : spec->uncertainty().params) {
    doc["uncertain_params"].push_back(
        {{"name", p.name}, {"lower", p.lower}, {"upper", p.upper}, {"nominal", p.nominal}});
  }
  const UncertaintySet& set = spec->uncertainty();
  doc["geometry"] = set.geometry == Geometry::kBox ? "box" : "ellipsoid";
  if (set.geometry == Geometry::kEllipsoid) {
    doc["ellipsoid"] = {{"center", VectorToJson(set.center)}, {"radii", VectorToJson(set.radii)}};
  }
  doc["objectives"] = spec->objective_names();
  doc["constraints"] = spec->constraint_names();
  return doc;
}

std::string ProblemHash(const Json& doc) {
  const std::string text = doc.dump();
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

// ---- Session messages ----------------------------------------------------

SessionCommand CommandFromJson(const Json& j, const NavigationData& data) {
  if (!j.is_object()) Fail("", "command must be an object");
  SessionCommand cmd;
  const std::string kind = json_util::String(Field(j, "", "command"), "/command");
  if (kind == "reset") {
    cmd.kind = SessionCommand::Kind::kReset;
    return cmd;
  }
  if (kind == "move") {
    cmd.kind = SessionCommand::Kind::kMove;
  } else if (kind == "restrict") {
    cmd.kind = SessionCommand::Kind::kRestrict;
  } else {
    Fail("/command", fmt::format("must be 'move', 'restrict' or 'reset', got '{}'", kind));
  }
  const std::string name = json_util::String(Field(j, "", "objective"), "/objective");
  const auto& names = data.objective_names;
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) Fail("/objective", fmt::format("unknown objective '{}'", name));
  cmd.objective = static_cast<int>(it - names.begin());
  cmd.value = NumberFromJson(Field(j, "", "value"), "/value");
  if (std::isnan(cmd.value) || (cmd.kind == SessionCommand::Kind::kMove && !std::isfinite(cmd.value))) {
    Fail("/value", "finite number expected");
  }
  return cmd;
}

Json ToJson(const SessionSnapshot& s, const NavigationData& data) {
  Json out;
  out["objectives"] = data.objective_names;
  out["lambda"] = Json::array();
  for (const auto& [i, l] : s.lambda) out["lambda"].push_back({{"point", i}, {"weight", l}});
  out["f_nav"] = VectorToJson(s.f_nav);
  out["markers"] = {{"nsr", VectorToJson(s.markers.nsr)},
                    {"mo", VectorToJson(s.markers.mo)},
                    {"price", VectorToJson(s.markers.price)},
                    {"d_zero", s.markers.d_zero},
                    {"ray_misses_front", s.markers.ray_misses_front}};
  out["restrictions"] = VectorToJson(s.restrictions);
  out["ranges"] = {{"lo", VectorToJson(s.range_lo)}, {"hi", VectorToJson(s.range_hi)}};
  Json hnv = Json::object(), wsv = Json::object();
  for (int i = 0; i < s.x.size() && i < static_cast<int>(data.hnv_names.size()); ++i) {
    hnv[data.hnv_names[i]] = NumberToJson(s.x[i]);
  }
  for (int i = 0; i < s.y_nsr.size() && i < static_cast<int>(data.wsv_names.size()); ++i) {
    wsv[data.wsv_names[i]] = NumberToJson(s.y_nsr[i]);
  }
  out["variables"] = {{"interpolated", true}, {"hnv", hnv}, {"wsv_nsr", wsv}};
  return out;
}

}  // namespace maro
