// maro: command-line front end for discretization, front construction,
// pricing, worst-case reports and the navigation service.
//
// Exit codes: 0 success, 1 infeasible or failed run (including fronts that
// differ in compare-fronts), 2 usage, file or schema errors.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "maro/error.h"
#include "maro/pipeline.h"
#include "maro/serialization.h"
#include "maro/service.h"

namespace {

using namespace maro;

struct Common {
  std::string problem;
  std::string builtin;
  std::string out;
  bool csv = false;
  std::optional<int> levels;
  std::uint32_t seed = 42;
};

void AddProblemOptions(CLI::App* cmd, Common& c) {
  auto* file = cmd->add_option("--problem", c.problem, "problem JSON file");
  auto* builtin = cmd->add_option("--builtin", c.builtin, "built-in model (sp1, sp2, column_surrogate)");
  file->excludes(builtin);
  cmd->add_option("--levels", c.levels,
                  "uniform levels per box axis (default: the problem's discretization, "
                  "else vertices and mid points)");
  cmd->add_option("--seed", c.seed, "seed of the NLP multistart")->capture_default_str();
}

void AddOutputOptions(CLI::App* cmd, Common& c) {
  cmd->add_option("-o,--out", c.out, "output file (default: standard output)");
  cmd->add_flag("--csv", c.csv, "write the tabular view as CSV instead of JSON");
}

Json ProblemDocument(const Common& c) {
  if (!c.problem.empty()) {
    Json doc;
    LoadProblemFile(c.problem, &doc);
    return doc;
  }
  if (!c.builtin.empty()) return BuiltinProblemDocument(c.builtin);
  throw Error(ErrorKind::kUsage, "one of --problem or --builtin is required");
}

RunSettings Settings(const Common& c, const Json& doc) {
  RunSettings s;
  s.discretization = DiscretizationDefaults(doc);
  if (c.levels) {
    if (*c.levels < 2) throw Error(ErrorKind::kUsage, "--levels needs at least 2");
    s.discretization.levels = BoxLevels::kUniform;
    s.discretization.uniform_levels = *c.levels;
  }
  s.seed = c.seed;
  return s;
}

void Emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out);
  if (!f) throw Error(ErrorKind::kUsage, fmt::format("{}: cannot write file", c.out));
  f << text;
}

void EmitJson(const Common& c, const Json& j) { Emit(c, j.dump(1) + "\n"); }

std::string Num(double v) { return NumberToJson(v).dump(); }

std::string Join(const std::vector<std::string>& cells) {
  std::string row;
  for (size_t i = 0; i < cells.size(); ++i) row += (i ? "," : "") + cells[i];
  return row + "\n";
}

// ---- discretize ----------------------------------------------------------

void CmdDiscretize(const Common& c) {
  const Json doc = ProblemDocument(c);
  const ProblemSpec spec = ProblemFromJson(doc);
  const ReferenceDiscretization ref = maro::Discretize(spec, Settings(c, doc));
  if (!c.csv) {
    EmitJson(c, {{"problem_hash", ProblemHash(doc)},
                 {"size", ref.size()},
                 {"discretization", ToJson(ref)}});
    return;
  }
  std::vector<std::string> head = {"id", "nominal", "label"};
  for (const UncertainParamSpec& p : spec.uncertainty().params) head.push_back(p.name);
  std::string text = Join(head);
  for (const Scenario& s : ref.scenarios()) {
    std::vector<std::string> row = {std::to_string(s.id), s.is_nominal ? "1" : "0", s.label};
    for (int i = 0; i < s.values.size(); ++i) row.push_back(Num(s.values[i]));
    text += Join(row);
  }
  Emit(c, text);
}

// ---- front ---------------------------------------------------------------

std::string FrontCsv(const RunArtifact& a, const ProblemSpec& spec) {
  std::vector<std::string> head = {"front", "point"};
  for (const std::string& n : spec.objective_names()) head.push_back(n);
  for (const std::string& n : spec.HnvNames()) head.push_back(n);
  std::string text = Join(head);
  for (const auto& [key, f] : a.fronts) {
    for (int i = 0; i < f.size(); ++i) {
      std::vector<std::string> row = {key, std::to_string(i)};
      const ParetoPoint& p = f.points[i];
      for (int j = 0; j < p.objectives.size(); ++j) row.push_back(Num(p.objectives[j]));
      for (int j = 0; j < p.solution.x.size(); ++j) row.push_back(Num(p.solution.x[j]));
      text += Join(row);
    }
  }
  return text;
}

struct FrontArgs {
  std::vector<std::string> modes = {"maro"};
  bool adaptive = false;
  bool all = false;
  int points = 8;
  std::optional<double> sandwich_eps;
};

void CmdFront(const Common& c, const FrontArgs& f) {
  const Json doc = ProblemDocument(c);
  RunSettings s = Settings(c, doc);
  s.adaptive = !f.all;
  s.points = f.points;
  if (f.sandwich_eps) {
    s.points = 0;
    s.sandwich.eps = *f.sandwich_eps;
  }
  const RunArtifact a = RunPipeline(doc, f.modes, s, false);
  if (c.csv) {
    Emit(c, FrontCsv(a, ProblemFromJson(doc)));
  } else {
    EmitJson(c, ToJson(a));
  }
}

// ---- price ---------------------------------------------------------------

std::string PriceCsv(const RunArtifact& a, const ProblemSpec& spec) {
  std::vector<std::string> head = {"point"};
  for (const char* group : {"f_maro", "f_nsr", "f_mo", "p_r"}) {
    for (const std::string& n : spec.objective_names()) head.push_back(fmt::format("{}_{}", group, n));
  }
  for (const std::string& n : spec.HnvNames()) head.push_back(n);
  head.insert(head.end(), {"alpha", "d_zero", "ray_misses_front"});
  std::string text = Join(head);
  for (size_t i = 0; i < a.prices.size(); ++i) {
    const PriceReport& r = a.prices[i];
    std::vector<std::string> row = {std::to_string(i)};
    for (const VectorXd* v : {&r.f_maro, &r.f_nsr, &r.f_mo, &r.p_r, &r.x_star}) {
      for (int j = 0; j < v->size(); ++j) row.push_back(Num((*v)[j]));
    }
    row.push_back(Num(r.alpha_star));
    row.push_back(r.d_zero ? "1" : "0");
    row.push_back(r.ray_misses_front ? "1" : "0");
    text += Join(row);
  }
  return text;
}

void CmdPrice(const Common& c, const FrontArgs& f, const std::string& artifact_in) {
  RunArtifact a;
  if (!artifact_in.empty()) {
    a = LoadArtifact(artifact_in);
    if (!a.fronts.count("maro") || !a.fronts.count("nominal")) {
      throw Error(ErrorKind::kUsage,
                  fmt::format("{}: pricing needs the 'maro' and 'nominal' fronts", artifact_in));
    }
    const ProblemSpec spec = ProblemFromJson(a.problem);
    RunSettings s = SettingsFromJson(a.settings);
    a.prices = PriceFront(spec, a.fronts.at("maro"), a.fronts.at("nominal"), NominalSolver(spec, s),
                          s.price);
  } else {
    const Json doc = ProblemDocument(c);
    RunSettings s = Settings(c, doc);
    s.adaptive = !f.all;
    s.points = f.points;
    if (f.sandwich_eps) {
      s.points = 0;
      s.sandwich.eps = *f.sandwich_eps;
    }
    a = RunPipeline(doc, {"maro", "nominal"}, s, true);
  }
  if (c.csv) {
    Emit(c, PriceCsv(a, ProblemFromJson(a.problem)));
  } else {
    EmitJson(c, ToJson(a));
  }
}

// ---- trace ---------------------------------------------------------------

// Worst-case report: every scenario that entered a final worst-case set,
// with the reasons it entered and how many solves kept it.
void CmdTrace(const Common& c, const FrontArgs& f, const std::string& artifact_in) {
  RunArtifact a;
  if (!artifact_in.empty()) {
    a = LoadArtifact(artifact_in);
  } else {
    const Json doc = ProblemDocument(c);
    RunSettings s = Settings(c, doc);
    s.points = f.points;
    a = RunPipeline(doc, {"maro"}, s, false);
  }
  if (a.traces.empty()) {
    throw Error(ErrorKind::kUsage, "no refinement traces (the MARO front was not built adaptively)");
  }
  std::map<int, std::set<std::string>> reasons;
  std::map<int, int> kept;
  long refinements = 0;
  for (const RefinementTrace& t : a.traces) {
    refinements += t.refinements();
    for (int id : t.final_set.ids) {
      ++kept[id];
      const auto it = t.final_set.provenance.find(id);
      if (it != t.final_set.provenance.end()) reasons[id].insert(it->second);
    }
  }
  const ReferenceDiscretization& ref = a.discretization;
  if (c.csv) {
    std::string text = Join({"id", "label", "nominal", "reasons", "solves"});
    for (const auto& [id, n] : kept) {
      std::string why;
      for (const std::string& r : reasons[id]) why += (why.empty() ? "" : " ") + r;
      text += Join({std::to_string(id), ref.ById(id).label, ref.ById(id).is_nominal ? "1" : "0", why,
                    std::to_string(n)});
    }
    Emit(c, text);
    return;
  }
  Json rows = Json::array();
  for (const auto& [id, n] : kept) {
    const Scenario& s = ref.ById(id);
    rows.push_back({{"id", id},
                    {"label", s.label},
                    {"values", VectorToJson(s.values)},
                    {"nominal", s.is_nominal},
                    {"reasons", std::vector<std::string>(reasons[id].begin(), reasons[id].end())},
                    {"solves", n}});
  }
  Json traces = Json::array();
  for (const RefinementTrace& t : a.traces) traces.push_back(ToJson(t));
  EmitJson(c, {{"problem_hash", a.problem_hash},
               {"reference_size", ref.size()},
               {"union_size", rows.size()},
               {"union_share", static_cast<double>(rows.size()) / ref.size()},
               {"solves", a.traces.size()},
               {"refinements", refinements},
               {"scenarios", rows},
               {"traces", traces}});
}

// ---- compare-fronts ------------------------------------------------------

// Pointwise comparison in the first front's normalization; returns the exit
// code (0 when every point agrees within the tolerance).
int CmdCompareFronts(const Common& c, const std::string& path_a, const std::string& path_b,
                  const std::string& key_a, const std::string& key_b, double tol) {
  const RunArtifact a = LoadArtifact(path_a);
  const RunArtifact b = LoadArtifact(path_b);
  auto front = [](const RunArtifact& r, const std::string& key, const std::string& path) {
    const auto it = r.fronts.find(key);
    if (it == r.fronts.end()) throw Error(ErrorKind::kUsage, fmt::format("{}: no front '{}'", path, key));
    return it->second;
  };
  const FrontApproximation fa = front(a, key_a, path_a);
  const FrontApproximation fb = front(b, key_b, path_b);
  Json out = {{"a", {{"file", path_a}, {"front", key_a}, {"points", fa.size()}}},
              {"b", {{"file", path_b}, {"front", key_b}, {"points", fb.size()}}},
              {"tolerance", tol}};
  if (a.problem_hash != b.problem_hash) out["warning"] = "the artifacts belong to different problems";
  double max_diff = 0.0;
  Json rows = Json::array();
  if (fa.size() == fb.size()) {
    for (int i = 0; i < fa.size(); ++i) {
      const VectorXd da = fa.normalization.Apply(fa.points[i].objectives);
      const VectorXd db = fa.normalization.Apply(fb.points[i].objectives);
      const double d = (da - db).cwiseAbs().maxCoeff();
      max_diff = std::max(max_diff, d);
      rows.push_back({{"point", i},
                      {"a", VectorToJson(fa.points[i].objectives)},
                      {"b", VectorToJson(fb.points[i].objectives)},
                      {"normalized_diff", d}});
    }
  } else {
    max_diff = std::numeric_limits<double>::infinity();
  }
  out["pointwise"] = rows;
  out["max_normalized_diff"] = NumberToJson(max_diff);
  try {
    out["a_above_b"] = DominanceCheck(fa, fb, fa.normalization).max_exceedance;
    out["b_above_a"] = DominanceCheck(fb, fa, fa.normalization).max_exceedance;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kDisjointRanges) throw;
    out["dominance"] = e.what();
  }
  const bool same = max_diff <= tol;
  out["agree"] = same;
  if (c.csv) {
    std::string text = Join({"point", "normalized_diff"});
    for (const Json& r : rows) text += Join({r["point"].dump(), r["normalized_diff"].dump()});
    Emit(c, text);
  } else {
    EmitJson(c, out);
  }
  return same ? 0 : 1;
}

int ExitCode(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage:
    case ErrorKind::kSchema:
    case ErrorKind::kInvalidSpec:
    case ErrorKind::kDimensionMismatch:
    case ErrorKind::kDimensionTooLarge:
      return 2;
    default:
      return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiobjective adjustable robust optimization toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(maro::kToolVersion));

  Common common;
  FrontArgs front_args;
  std::string artifact_in, compare_a, compare_b, key_a = "maro", key_b = "maro";
  double tol = 1e-4;
  std::string host = "127.0.0.1";
  int port = 8080;

  auto* discretize = app.add_subcommand("discretize", "emit the reference discretization");
  AddProblemOptions(discretize, common);
  AddOutputOptions(discretize, common);

  auto add_front_options = [&](CLI::App* cmd) {
    auto* adaptive = cmd->add_flag("--adaptive", front_args.adaptive,
                                   "adaptive worst-case scenario sets (default)");
    auto* all = cmd->add_flag("--all-scenarios", front_args.all,
                              "replicate every reference scenario in every solve");
    adaptive->excludes(all);
    cmd->add_option("--points", front_args.points, "weighted-sum points per front, extremes included")
        ->capture_default_str()
        ->check(CLI::Range(2, 1000));
    cmd->add_option("--sandwich-eps", front_args.sandwich_eps,
                    "build fronts by sandwiching to this normalized gap instead");
  };

  auto* front = app.add_subcommand("front", "compute one or more fronts");
  AddProblemOptions(front, common);
  AddOutputOptions(front, common);
  add_front_options(front);
  front->add_option("--mode", front_args.modes, "nominal, maro, mro or scenario:<id> (repeatable)")
      ->capture_default_str();

  auto* price = app.add_subcommand("price", "price of robustness along the MARO front");
  AddProblemOptions(price, common);
  AddOutputOptions(price, common);
  add_front_options(price);
  price->add_option("--artifact", artifact_in, "price the fronts of an existing artifact");

  auto* trace = app.add_subcommand("trace", "worst-case scenario report of the adaptive MARO front");
  AddProblemOptions(trace, common);
  AddOutputOptions(trace, common);
  trace->add_option("--points", front_args.points, "weighted-sum points")->capture_default_str();
  trace->add_option("--artifact", artifact_in, "report on an existing artifact");

  auto* compare = app.add_subcommand("compare-fronts", "compare two fronts point by point");
  compare->add_option("a", compare_a, "first artifact")->required();
  compare->add_option("b", compare_b, "second artifact")->required();
  compare->add_option("--front-a", key_a, "front key in the first artifact")->capture_default_str();
  compare->add_option("--front-b", key_b, "front key in the second artifact")->capture_default_str();
  compare->add_option("--tol", tol, "largest normalized difference accepted")->capture_default_str();
  AddOutputOptions(compare, common);

  auto* serve = app.add_subcommand("serve", "serve an artifact to navigation clients over HTTP");
  serve->add_option("--artifact", artifact_in, "artifact with priced MARO and nominal fronts")
      ->required();
  serve->add_option("--host", host, "interface to bind")->capture_default_str();
  serve->add_option("--port", port, "TCP port")->capture_default_str()->check(CLI::Range(1, 65535));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*discretize) CmdDiscretize(common);
    if (*front) CmdFront(common, front_args);
    if (*price) CmdPrice(common, front_args, artifact_in);
    if (*trace) CmdTrace(common, front_args, artifact_in);
    if (*compare) return CmdCompareFronts(common, compare_a, compare_b, key_a, key_b, tol);
    if (*serve) Serve(artifact_in, host, port);
  } catch (const Error& e) {
    std::cerr << "maro: " << e.what() << "\n";
    return ExitCode(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "maro: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
