#ifndef MARO_REPLICATED_H_
#define MARO_REPLICATED_H_

#include <map>
#include <string>
#include <vector>

#include "maro/discretization.h"
#include "maro/nlp.h"
#include "maro/problem.h"

namespace maro {

enum class SolveMode { kNominal, kAdjustable, kNonAdjustable };

const char* SolveModeName(SolveMode mode);
// Accepts "nominal", "adjustable", "non_adjustable"; throws kUsage otherwise.
SolveMode ParseSolveMode(const std::string& name);

// Weighted-sum scalarization. `caps` optionally bounds individual worst-case
// objectives from above (used for lexicographic second stages); an entry of
// +infinity means unbounded.
struct ScalarizationSpec {
  VectorXd weights;
  VectorXd caps;

  static ScalarizationSpec WeightedSum(VectorXd weights);
  // Weights must be non-negative with a positive entry; they are rescaled to
  // sum to one. Throws kInvalidSpec.
  ScalarizationSpec Normalized(int num_objectives) const;
  double Value(const VectorXd& objectives) const { return weights.dot(objectives); }
  bool HasCaps() const;
};

struct ReplicatedSolution {
  SolveMode mode = SolveMode::kAdjustable;
  VectorXd x;
  std::vector<int> scenario_ids;  // column order of f and g
  std::vector<VectorXd> y;        // one per scenario, identical in MRO mode
  VectorXd t;                     // t_j = max_k f(j, k)
  MatrixXd f;                     // objectives x scenarios
  MatrixXd g;                     // constraints x scenarios
  std::vector<int> active_objective;   // argmax scenario id per objective
  std::vector<int> active_constraint;  // most violated scenario id per constraint
  NlpStatus status = NlpStatus::kOptimal;
  double max_violation = 0.0;
  int iterations = 0;
  int nlp_variables = 0;

  // y for the given scenario id; throws kInvalidSpec when absent.
  const VectorXd& YFor(int scenario_id) const;
};

struct ParetoPoint {
  VectorXd objectives;
  ReplicatedSolution solution;
  ScalarizationSpec scalarization;
  std::vector<int> scenario_set_ids;

  double ScalarizedValue() const { return scalarization.Value(objectives); }
};

struct WarmStart {
  VectorXd x;
  std::map<int, VectorXd> y;  // by scenario id
};

NlpProblem BuildReplicated(const ProblemSpec& spec,
                           const std::vector<Scenario>& scenarios,
                           const ScalarizationSpec& scalarization, SolveMode mode,
                           const WarmStart* warm = nullptr);

// Throws kEmptyScenarioSet, kInvalidSpec (nominal mode with anything but one
// scenario) and kInfeasibleModel.
ParetoPoint SolvePoint(const ProblemSpec& spec, const std::vector<Scenario>& scenarios,
                       const ScalarizationSpec& scalarization, SolveMode mode,
                       const WarmStart* warm = nullptr,
                       const NlpOptions& options = {});

// Evaluates a fixed decision on every scenario and fills t, f, g and the
// active worst-case attribution.
ReplicatedSolution EvaluateReplicated(const ProblemSpec& spec,
                                      const std::vector<Scenario>& scenarios,
                                      SolveMode mode, const VectorXd& x,
                                      const std::vector<VectorXd>& y);

// Scenarios of `reference` with the given ids, in the given order.
std::vector<Scenario> SelectScenarios(const ReferenceDiscretization& reference,
                                      const std::vector<int>& ids);

}  // namespace maro

#endif  // MARO_REPLICATED_H_
