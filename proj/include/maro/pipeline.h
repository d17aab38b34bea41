#ifndef MARO_PIPELINE_H_
#define MARO_PIPELINE_H_

// End-to-end runs shared by the command-line tool, the service tests and the
// acceptance harness: discretize, build fronts, price, and pack everything
// into a RunArtifact.

#include <cstdint>
#include <string>
#include <vector>

#include "maro/adaptive.h"
#include "maro/serialization.h"

namespace maro {

struct RunSettings {
  // Reference discretization. A problem document may carry defaults in an
  // optional "discretization" object ({"rule": "vertices_mids" | "uniform",
  // "levels": n}); explicit settings win.
  DiscretizationOptions discretization;
  // Weighted-sum points per front (extremes included). Zero switches to the
  // sandwich method with the options below.
  int points = 8;
  SandwichOptions sandwich;
  bool adaptive = true;  // false: every robust point uses the whole reference
  std::uint32_t seed = 42;
  PriceFrontOptions price;
};

Json ToJson(const RunSettings& s);
RunSettings SettingsFromJson(const Json& j, const std::string& path = "/settings");

// Discretization defaults of a problem document (vertices and mid points
// when the document has none).
DiscretizationOptions DiscretizationDefaults(const Json& problem_doc);

ReferenceDiscretization Discretize(const ProblemSpec& spec, const RunSettings& settings);

struct FrontRun {
  FrontApproximation front;
  std::vector<RefinementTrace> traces;  // adaptive robust fronts only
  WcScenarioSet union_set;              // adaptive robust fronts only
  long replicated_work = 0;
};

// Front for one artifact key: "nominal", "maro", "mro" or "scenario:<id>".
// Throws kUsage for other keys and kInvalidSpec for unknown scenario ids.
FrontRun ComputeFront(const ProblemSpec& spec, const ReferenceDiscretization& reference,
                      const std::string& key, const RunSettings& settings);

// Solver of the nominal problem (nominal scenario only).
PointSolver NominalSolver(const ProblemSpec& spec, const RunSettings& settings);

// Builds an artifact holding the requested fronts. With `with_prices`, the
// "maro" and "nominal" fronts are added when missing and the MARO front is
// priced against the (locally refined) nominal front.
RunArtifact RunPipeline(const Json& problem_doc, const std::vector<std::string>& front_keys,
                        const RunSettings& settings, bool with_prices);

// Current UTC time as ISO 8601 with second resolution.
std::string UtcTimestamp();

}  // namespace maro

#endif  // MARO_PIPELINE_H_
