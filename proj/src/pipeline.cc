#include "maro/pipeline.h"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <functional>

#include <fmt/format.h>

#include "json_util.h"
#include "maro/case_study.h"
#include "maro/error.h"

namespace maro {

using json_util::Fail;
using json_util::Field;

namespace {

const char* RuleName(BoxLevels l) {
  return l == BoxLevels::kUniform ? "uniform" : "vertices_mids";
}

DiscretizationOptions ReadDiscretization(const Json& j, const std::string& path) {
  DiscretizationOptions o;
  if (!j.is_object()) Fail(path, "object expected");
  if (j.contains("rule")) {
    const std::string rule = json_util::String(j["rule"], path + "/rule");
    if (rule == "uniform") {
      o.levels = BoxLevels::kUniform;
    } else if (rule != "vertices_mids") {
      Fail(path + "/rule", fmt::format("must be 'vertices_mids' or 'uniform', got '{}'", rule));
    }
  }
  if (j.contains("levels")) {
    o.uniform_levels = static_cast<int>(json_util::Int(j["levels"], path + "/levels"));
    if (o.uniform_levels < 2) Fail(path + "/levels", "at least 2 levels are needed");
  }
  return o;
}

NlpOptions Seeded(std::uint32_t seed) {
  NlpOptions o;
  o.seed = seed;
  return o;
}

}  // namespace

Json ToJson(const RunSettings& s) {
  return {{"discretization",
           {{"rule", RuleName(s.discretization.levels)}, {"levels", s.discretization.uniform_levels}}},
          {"points", s.points},
          {"sandwich", {{"eps", s.sandwich.eps}, {"max_solves", s.sandwich.max_solves}}},
          {"adaptive", s.adaptive},
          {"seed", s.seed},
          {"price", {{"refine", s.price.refine},
                     {"refine_gap", s.price.refine_gap},
                     {"max_refine_solves", s.price.max_refine_solves}}}};
}

RunSettings SettingsFromJson(const Json& j, const std::string& path) {
  RunSettings s;
  s.discretization = ReadDiscretization(Field(j, path, "discretization"), path + "/discretization");
  s.points = static_cast<int>(json_util::Int(Field(j, path, "points"), path + "/points"));
  const std::string sp = path + "/sandwich";
  const Json& sw = Field(j, path, "sandwich");
  s.sandwich.eps = NumberFromJson(Field(sw, sp, "eps"), sp + "/eps");
  s.sandwich.max_solves = static_cast<int>(json_util::Int(Field(sw, sp, "max_solves"), sp + "/max_solves"));
  s.adaptive = json_util::Bool(Field(j, path, "adaptive"), path + "/adaptive");
  const long seed = json_util::Int(Field(j, path, "seed"), path + "/seed");
  if (seed < 0 || seed > 0xffffffffL) Fail(path + "/seed", "must fit in 32 unsigned bits");
  s.seed = static_cast<std::uint32_t>(seed);
  const std::string pp = path + "/price";
  const Json& pr = Field(j, path, "price");
  s.price.refine = json_util::Bool(Field(pr, pp, "refine"), pp + "/refine");
  s.price.refine_gap = NumberFromJson(Field(pr, pp, "refine_gap"), pp + "/refine_gap");
  s.price.max_refine_solves =
      static_cast<int>(json_util::Int(Field(pr, pp, "max_refine_solves"), pp + "/max_refine_solves"));
  s.price.nsr.nlp.seed = s.seed;
  return s;
}

DiscretizationOptions DiscretizationDefaults(const Json& problem_doc) {
  if (!problem_doc.is_object() || !problem_doc.contains("discretization")) return {};
  return ReadDiscretization(problem_doc["discretization"], "/discretization");
}

ReferenceDiscretization Discretize(const ProblemSpec& spec, const RunSettings& settings) {
  return Generate(spec.uncertainty(), settings.discretization);
}

PointSolver NominalSolver(const ProblemSpec& spec, const RunSettings& settings) {
  const ReferenceDiscretization nominal = NominalOnly(spec.uncertainty());
  const NlpOptions nlp = Seeded(settings.seed);
  return [spec, nominal, nlp](const ScalarizationSpec& s) {
    return SolvePoint(spec, {nominal.nominal()}, s, SolveMode::kNominal, nullptr, nlp);
  };
}

namespace {

FrontApproximation BuildFront(const PointSolver& solver, SolveMode mode,
                              const RunSettings& settings) {
  if (settings.points <= 0) return Sandwich(solver, mode, settings.sandwich);
  if (settings.points == 1) Fail("/settings/points", "a front needs at least 2 points");
  return FrontFromSchedule(solver, mode, InteriorWeights(settings.points));
}

}  // namespace

FrontRun ComputeFront(const ProblemSpec& spec, const ReferenceDiscretization& reference,
                      const std::string& key, const RunSettings& settings) {
  FrontRun run;
  const NlpOptions nlp = Seeded(settings.seed);
  if (key == "nominal") {
    run.front = BuildFront(NominalSolver(spec, settings), SolveMode::kNominal, settings);
    return run;
  }
  if (key.rfind("scenario:", 0) == 0) {
    int id = 0;
    try {
      size_t used = 0;
      id = std::stoi(key.substr(9), &used);
      if (used != key.size() - 9) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw Error(ErrorKind::kUsage, fmt::format("'{}' does not name a scenario id", key));
    }
    const Scenario scenario = reference.ById(id);
    run.front = BuildFront(
        [&](const ScalarizationSpec& s) {
          return SolvePoint(spec, {scenario}, s, SolveMode::kAdjustable, nullptr, nlp);
        },
        SolveMode::kAdjustable, settings);
    return run;
  }
  SolveMode mode;
  if (key == "maro") {
    mode = SolveMode::kAdjustable;
  } else if (key == "mro") {
    mode = SolveMode::kNonAdjustable;
  } else {
    throw Error(ErrorKind::kUsage,
                fmt::format("unknown front '{}' (nominal, maro, mro or scenario:<id>)", key));
  }
  if (settings.adaptive) {
    AdaptiveOptions opts;
    opts.nlp = nlp;
    opts.inner = nlp;
    AdaptiveFrontSolver solver(spec, reference, mode, opts);
    run.front = BuildFront(std::ref(solver), mode, settings);
    run.traces = solver.traces();
    run.union_set = solver.union_set();
    run.replicated_work = solver.replicated_work();
  } else {
    AllScenarioSolver solver(spec, reference, mode, nlp);
    run.front = BuildFront(std::ref(solver), mode, settings);
    run.replicated_work = solver.replicated_work();
  }
  return run;
}

RunArtifact RunPipeline(const Json& problem_doc, const std::vector<std::string>& front_keys,
                        const RunSettings& settings, bool with_prices) {
  const ProblemSpec spec = ProblemFromJson(problem_doc);
  RunArtifact a;
  a.created_at = UtcTimestamp();
  a.problem = problem_doc;
  a.problem_hash = ProblemHash(problem_doc);
  a.settings = ToJson(settings);
  a.discretization = Discretize(spec, settings);
  std::vector<std::string> keys = front_keys;
  if (with_prices) {
    for (const char* k : {"maro", "nominal"}) {
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
    }
  }
  for (const std::string& key : keys) {
    if (a.fronts.count(key)) continue;
    FrontRun run = ComputeFront(spec, a.discretization, key, settings);
    a.fronts[key] = std::move(run.front);
    if (key == "maro") a.traces = std::move(run.traces);
  }
  if (with_prices) {
    PriceFrontOptions popts = settings.price;
    popts.nsr.nlp.seed = settings.seed;
    a.prices = PriceFront(spec, a.fronts.at("maro"), a.fronts.at("nominal"),
                          NominalSolver(spec, settings), popts);
  }
  return a;
}

std::string UtcTimestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace maro
