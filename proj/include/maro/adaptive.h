#ifndef MARO_ADAPTIVE_H_
#define MARO_ADAPTIVE_H_

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "maro/replicated.h"

namespace maro {

// Ordered subset of the reference discretization with the reason each
// scenario entered ("initial", "objective:<name>", "constraint:<name>").
struct WcScenarioSet {
  std::vector<int> ids;
  std::map<int, std::string> provenance;

  static WcScenarioSet NominalOnly(const ReferenceDiscretization& reference);
  bool Contains(int id) const;
  // Returns false when the id was already present.
  bool Add(int id, const std::string& reason);
};

struct AdaptiveOptions {
  double add_tol = 1e-6;
  double feas_tol = 1e-6;
  int max_alternations = 20;
  NlpOptions nlp;
  NlpOptions inner;
};

struct ObjectiveWorstCase {
  int scenario_id = 0;
  double value = 0.0;
  bool inner_infeasible = false;
  // Inner optimum per reference scenario, in reference order; +inf where no
  // feasible y exists.
  std::vector<double> values;
};

struct ConstraintWorstCase {
  int constraint = 0;
  int scenario_id = 0;
  double violation = 0.0;
};

// Inner optima min_y f_j(x, y, u) s.t. g <= 0 over every reference scenario.
// `warm` supplies y starts by scenario id; `fixed_y` replaces the inner
// solve by an evaluation at that y (used for non-adjustable designs).
ObjectiveWorstCase FindObjectiveWc(const ProblemSpec& spec, const VectorXd& x, int j,
                                   const ReferenceDiscretization& reference,
                                   const AdaptiveOptions& options = {},
                                   const WarmStart* warm = nullptr,
                                   const VectorXd* fixed_y = nullptr);

// Scenarios where min_y max_c g_c exceeds feas_tol, reduced to the most
// violating scenario per active constraint. Ordered by constraint index.
std::vector<ConstraintWorstCase> FindConstraintWc(const ProblemSpec& spec,
                                                  const VectorXd& x,
                                                  const ReferenceDiscretization& reference,
                                                  const AdaptiveOptions& options = {},
                                                  const WarmStart* warm = nullptr,
                                                  const VectorXd* fixed_y = nullptr);

// Inner constraint optimum min_y max_c g_c for every reference scenario.
std::vector<double> ConstraintInnerOptima(const ProblemSpec& spec, const VectorXd& x,
                                          const ReferenceDiscretization& reference,
                                          const AdaptiveOptions& options = {},
                                          const WarmStart* warm = nullptr,
                                          const VectorXd* fixed_y = nullptr);

struct RefinementIteration {
  VectorXd objectives;               // master worst-case values t
  std::vector<int> scenario_ids;     // master scenario set
  std::vector<int> added;            // scenarios added after this master
  VectorXd objective_wc_values;      // max inner optimum per objective
  std::vector<int> objective_wc_ids;
  VectorXd constraint_wc_violations; // max inner violation per constraint
  NlpStatus status = NlpStatus::kOptimal;
};

enum class Termination { kNoNewScenarios, kIterationCap };

const char* TerminationName(Termination t);

struct RefinementTrace {
  std::vector<RefinementIteration> iterations;
  Termination terminated = Termination::kNoNewScenarios;
  WcScenarioSet final_set;
  // Sum over master solves of (replicated y blocks x |y|).
  long replicated_work = 0;

  int refinements() const { return static_cast<int>(iterations.size()) - 1; }
};

// Full sweep over the reference at a fixed solution: largest excess of an
// inner objective optimum over t_j and largest inner constraint violation.
struct Certificate {
  VectorXd objective_excess;
  double max_violation = 0.0;

  bool Holds(double tol = 1e-6) const {
    return (objective_excess.array() <= tol).all() && max_violation <= tol;
  }
};

Certificate CertifyAgainstReference(const ProblemSpec& spec,
                                    const ReferenceDiscretization& reference,
                                    const ParetoPoint& point,
                                    const AdaptiveOptions& options = {});

std::pair<ParetoPoint, RefinementTrace> SolveAdaptivePoint(
    const ProblemSpec& spec, const ReferenceDiscretization& reference,
    const ScalarizationSpec& scalarization, const WcScenarioSet& initial,
    SolveMode mode, const AdaptiveOptions& options = {},
    const WarmStart* warm = nullptr);

// Replicated work of a single master solve.
long ReplicatedWork(const ProblemSpec& spec, const ParetoPoint& point);

// Stateful point solver for front construction: every call after the first
// starts from the union of all worst-case sets found so far plus the nominal
// scenario, and from the previous point's variables.
class AdaptiveFrontSolver {
 public:
  AdaptiveFrontSolver(const ProblemSpec& spec, const ReferenceDiscretization& reference,
                      SolveMode mode, AdaptiveOptions options = {});

  ParetoPoint operator()(const ScalarizationSpec& scalarization);

  const std::vector<RefinementTrace>& traces() const { return traces_; }
  const WcScenarioSet& union_set() const { return union_; }
  long replicated_work() const { return work_; }

 private:
  const ProblemSpec& spec_;
  const ReferenceDiscretization& reference_;
  SolveMode mode_;
  AdaptiveOptions options_;
  WcScenarioSet union_;
  std::vector<RefinementTrace> traces_;
  WarmStart warm_;
  bool have_warm_ = false;
  long work_ = 0;
};

// Solves every point on the full reference discretization.
class AllScenarioSolver {
 public:
  AllScenarioSolver(const ProblemSpec& spec, const ReferenceDiscretization& reference,
                    SolveMode mode, NlpOptions options = {});

  ParetoPoint operator()(const ScalarizationSpec& scalarization);
  long replicated_work() const { return work_; }

 private:
  const ProblemSpec& spec_;
  const ReferenceDiscretization& reference_;
  SolveMode mode_;
  NlpOptions options_;
  long work_ = 0;
};

}  // namespace maro

#endif  // MARO_ADAPTIVE_H_
