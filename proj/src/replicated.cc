#include "maro/replicated.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>

#include "maro/error.h"

namespace maro {

const char* SolveModeName(SolveMode mode) {
  switch (mode) {
    case SolveMode::kNominal: return "nominal";
    case SolveMode::kAdjustable: return "adjustable";
    case SolveMode::kNonAdjustable: return "non_adjustable";
  }
  return "unknown";
}

SolveMode ParseSolveMode(const std::string& name) {
  if (name == "nominal") return SolveMode::kNominal;
  if (name == "adjustable") return SolveMode::kAdjustable;
  if (name == "non_adjustable") return SolveMode::kNonAdjustable;
  throw Error(ErrorKind::kUsage, fmt::format("unknown solve mode '{}'", name));
}

ScalarizationSpec ScalarizationSpec::WeightedSum(VectorXd weights) {
  ScalarizationSpec s;
  s.weights = std::move(weights);
  return s;
}

ScalarizationSpec ScalarizationSpec::Normalized(int num_objectives) const {
  if (weights.size() != num_objectives) {
    throw Error(ErrorKind::kDimensionMismatch,
                fmt::format("expected {} weights, got {}", num_objectives,
                            weights.size()));
  }
  if (caps.size() != 0 && caps.size() != num_objectives) {
    throw Error(ErrorKind::kDimensionMismatch, "caps must have one entry per objective");
  }
  double sum = 0.0;
  for (int j = 0; j < weights.size(); ++j) {
    if (!std::isfinite(weights[j]) || weights[j] < 0.0) {
      throw Error(ErrorKind::kInvalidSpec, "weights must be finite and non-negative");
    }
    sum += weights[j];
  }
  if (!(sum > 0.0)) {
    throw Error(ErrorKind::kInvalidSpec, "at least one weight must be positive");
  }
  ScalarizationSpec out = *this;
  out.weights /= sum;
  return out;
}

bool ScalarizationSpec::HasCaps() const {
  for (int j = 0; j < caps.size(); ++j) {
    if (caps[j] < std::numeric_limits<double>::infinity()) return true;
  }
  return false;
}

const VectorXd& ReplicatedSolution::YFor(int scenario_id) const {
  for (size_t k = 0; k < scenario_ids.size(); ++k) {
    if (scenario_ids[k] == scenario_id) return y[k];
  }
  throw Error(ErrorKind::kInvalidSpec,
              fmt::format("scenario {} is not part of this solution", scenario_id));
}

namespace {

void CheckScenarios(const std::vector<Scenario>& scenarios, SolveMode mode) {
  if (scenarios.empty()) {
    throw Error(ErrorKind::kEmptyScenarioSet, "scenario set is empty");
  }
  if (mode == SolveMode::kNominal && (scenarios.size() != 1 || !scenarios[0].is_nominal)) {
    throw Error(ErrorKind::kInvalidSpec,
                "nominal mode takes exactly the nominal scenario");
  }
}

// Index of the maximum entry; near-ties go to the lowest scenario id.
int ArgMaxLowestId(const VectorXd& values, const std::vector<int>& ids) {
  const double top = values.maxCoeff();
  const double tol = 1e-9 * std::max(1.0, std::abs(top));
  int best = -1;
  for (int k = 0; k < values.size(); ++k) {
    if (values[k] >= top - tol && (best < 0 || ids[k] < ids[best])) best = k;
  }
  return best;
}

// Layout of the replicated decision vector: x, then one y block per scenario
// (a single shared block in MRO mode), then t.
struct Layout {
  int nx = 0;
  int ny = 0;
  int blocks = 0;
  int m_obj = 0;
  int n_con = 0;
  int k = 0;

  int y_offset(int scenario) const { return nx + (blocks == 1 ? 0 : scenario) * ny; }
  int t_offset() const { return nx + blocks * ny; }
  int n() const { return t_offset() + m_obj; }
  int rows_per_scenario() const { return m_obj + n_con; }
};

Layout MakeLayout(const ProblemSpec& spec, int scenarios, SolveMode mode) {
  Layout l;
  l.nx = spec.num_hnv();
  l.ny = spec.num_wsv();
  l.m_obj = spec.num_objectives();
  l.n_con = spec.num_constraints();
  l.k = scenarios;
  l.blocks = mode == SolveMode::kNonAdjustable ? 1 : scenarios;
  return l;
}

// Range of objective values seen on a fixed sample of the decision box; it
// only has to be wide enough to contain the optimal epigraph values.
void ObjectiveRange(const ProblemSpec& spec, const std::vector<Scenario>& scenarios,
                    const VectorXd& x0, const VectorXd& y0, VectorXd& lo,
                    VectorXd& hi) {
  const int m = spec.num_objectives();
  lo = VectorXd::Constant(m, std::numeric_limits<double>::infinity());
  hi = VectorXd::Constant(m, -std::numeric_limits<double>::infinity());
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const VectorXd xl = spec.HnvLower(), xu = spec.HnvUpper();
  const VectorXd yl = spec.WsvLower(), yu = spec.WsvUpper();
  VectorXd f(m), g(spec.num_constraints());
  for (int sample = 0; sample < 33; ++sample) {
    VectorXd x = x0, y = y0;
    if (sample > 0) {
      for (int i = 0; i < x.size(); ++i) x[i] = xl[i] + unit(rng) * (xu[i] - xl[i]);
      for (int i = 0; i < y.size(); ++i) y[i] = yl[i] + unit(rng) * (yu[i] - yl[i]);
    }
    for (const Scenario& s : scenarios) {
      spec.model().Evaluate(x, y, s.values, f, g);
      if (!f.allFinite()) continue;
      lo = lo.cwiseMin(f);
      hi = hi.cwiseMax(f);
    }
  }
  for (int j = 0; j < m; ++j) {
    if (!std::isfinite(lo[j])) {
      throw Error(ErrorKind::kNonFiniteEvaluation,
                  fmt::format("objective {} is non-finite on all sampled points",
                              spec.objective_names()[j]));
    }
  }
}

}  // namespace

NlpProblem BuildReplicated(const ProblemSpec& spec, const std::vector<Scenario>& scenarios,
                           const ScalarizationSpec& scalarization, SolveMode mode,
                           const WarmStart* warm) {
  CheckScenarios(scenarios, mode);
  const ScalarizationSpec sc = scalarization.Normalized(spec.num_objectives());
  const Layout l = MakeLayout(spec, static_cast<int>(scenarios.size()), mode);

  NlpProblem p;
  p.n = l.n();
  p.m = l.k * l.rows_per_scenario();
  p.lower.resize(p.n);
  p.upper.resize(p.n);
  p.scale = VectorXd();

  const VectorXd x0 = warm && warm->x.size() == l.nx ? warm->x : spec.HnvInitial();
  VectorXd nominal_y = spec.WsvInitial();
  if (warm) {
    for (const Scenario& s : scenarios) {
      if (!s.is_nominal) continue;
      auto it = warm->y.find(s.id);
      if (it != warm->y.end()) nominal_y = it->second;
    }
    if (mode == SolveMode::kNonAdjustable && !warm->y.empty()) {
      nominal_y = warm->y.begin()->second;
    }
  }

  p.lower.head(l.nx) = spec.HnvLower();
  p.upper.head(l.nx) = spec.HnvUpper();
  p.start.resize(p.n);
  p.start.head(l.nx) = x0.cwiseMax(spec.HnvLower()).cwiseMin(spec.HnvUpper());
  for (int b = 0; b < l.blocks; ++b) {
    const int off = l.nx + b * l.ny;
    p.lower.segment(off, l.ny) = spec.WsvLower();
    p.upper.segment(off, l.ny) = spec.WsvUpper();
    VectorXd y = nominal_y;
    if (warm && l.blocks > 1) {
      auto it = warm->y.find(scenarios[b].id);
      if (it != warm->y.end()) y = it->second;
    }
    p.start.segment(off, l.ny) = y.cwiseMax(spec.WsvLower()).cwiseMin(spec.WsvUpper());
  }

  VectorXd flo, fhi;
  ObjectiveRange(spec, scenarios, p.start.head(l.nx), nominal_y, flo, fhi);
  VectorXd tscale(l.m_obj);
  for (int j = 0; j < l.m_obj; ++j) {
    const double span = std::max(fhi[j] - flo[j], 1e-3 * std::max(1.0, std::abs(fhi[j])));
    double lo = flo[j] - span;
    double hi = fhi[j] + span;
    if (sc.caps.size() && sc.caps[j] < std::numeric_limits<double>::infinity()) {
      hi = sc.caps[j];
      lo = std::min(lo, hi - span);
    }
    p.lower[l.t_offset() + j] = lo;
    p.upper[l.t_offset() + j] = hi;
    tscale[j] = span;
  }
  p.scale = p.upper - p.lower;
  p.scale.tail(l.m_obj) = tscale;

  const ProblemSpec* spec_ptr = &spec;
  const std::vector<Scenario> scen = scenarios;
  const VectorXd weights = sc.weights;
  auto fill_t = [spec_ptr, scen, l](VectorXd& z) {
    VectorXd f(l.m_obj), g(l.n_con);
    VectorXd t = VectorXd::Constant(l.m_obj, -std::numeric_limits<double>::infinity());
    for (int k = 0; k < l.k; ++k) {
      spec_ptr->model().Evaluate(z.head(l.nx), z.segment(l.y_offset(k), l.ny),
                                 scen[k].values, f, g);
      if (!f.allFinite()) return;
      t = t.cwiseMax(f);
    }
    z.tail(l.m_obj) = t;
  };
  {
    VectorXd z = p.start;
    fill_t(z);
    p.start = z.cwiseMax(p.lower).cwiseMin(p.upper);
  }
  p.complete_start = [fill_t, lower = p.lower, upper = p.upper](VectorXd& z) {
    fill_t(z);
    z = z.cwiseMax(lower).cwiseMin(upper);
  };

  p.evaluate = [spec_ptr, scen, l, weights](const VectorXd& z, double& fval,
                                             VectorXd& c, VectorXd* grad,
                                             MatrixXd* jac) {
    const int n = l.n();
    const auto t = z.tail(l.m_obj);
    fval = weights.dot(t);
    if (grad) {
      grad->setZero(n);
      grad->tail(l.m_obj) = weights;
    }
    c.resize(l.k * l.rows_per_scenario());
    if (jac) jac->setZero(c.size(), n);
    ModelJacobians mj;
    VectorXd f(l.m_obj), g(l.n_con);
    for (int k = 0; k < l.k; ++k) {
      const VectorXd x = z.head(l.nx);
      const VectorXd y = z.segment(l.y_offset(k), l.ny);
      const int row = k * l.rows_per_scenario();
      if (jac) {
        EvaluateWithJacobians(*spec_ptr, x, y, scen[k].values, mj);
        f = mj.objectives;
        g = mj.constraints;
      } else {
        spec_ptr->model().Evaluate(x, y, scen[k].values, f, g);
      }
      c.segment(row, l.m_obj) = f - t;
      c.segment(row + l.m_obj, l.n_con) = g;
      if (jac) {
        jac->block(row, 0, l.m_obj, l.nx) = mj.objectives_x;
        jac->block(row, l.y_offset(k), l.m_obj, l.ny) = mj.objectives_y;
        for (int j = 0; j < l.m_obj; ++j) (*jac)(row + j, l.t_offset() + j) = -1.0;
        jac->block(row + l.m_obj, 0, l.n_con, l.nx) = mj.constraints_x;
        jac->block(row + l.m_obj, l.y_offset(k), l.n_con, l.ny) = mj.constraints_y;
      }
    }
  };
  return p;
}

ReplicatedSolution EvaluateReplicated(const ProblemSpec& spec,
                                      const std::vector<Scenario>& scenarios,
                                      SolveMode mode, const VectorXd& x,
                                      const std::vector<VectorXd>& y) {
  CheckScenarios(scenarios, mode);
  const int k = static_cast<int>(scenarios.size());
  if (static_cast<int>(y.size()) != k) {
    throw Error(ErrorKind::kDimensionMismatch, "need one y per scenario");
  }
  ReplicatedSolution s;
  s.mode = mode;
  s.x = x;
  s.y = y;
  s.f.resize(spec.num_objectives(), k);
  s.g.resize(spec.num_constraints(), k);
  for (int i = 0; i < k; ++i) {
    s.scenario_ids.push_back(scenarios[i].id);
    const Evaluation e = Evaluate(spec, x, y[i], scenarios[i].values);
    s.f.col(i) = e.objectives;
    s.g.col(i) = e.constraints;
  }
  s.t = s.f.rowwise().maxCoeff();
  for (int j = 0; j < s.f.rows(); ++j) {
    s.active_objective.push_back(
        s.scenario_ids[ArgMaxLowestId(s.f.row(j).transpose(), s.scenario_ids)]);
  }
  for (int c = 0; c < s.g.rows(); ++c) {
    s.active_constraint.push_back(
        s.scenario_ids[ArgMaxLowestId(s.g.row(c).transpose(), s.scenario_ids)]);
  }
  s.max_violation = s.g.size() ? std::max(0.0, s.g.maxCoeff()) : 0.0;
  return s;
}

ParetoPoint SolvePoint(const ProblemSpec& spec, const std::vector<Scenario>& scenarios,
                       const ScalarizationSpec& scalarization, SolveMode mode,
                       const WarmStart* warm, const NlpOptions& options) {
  const ScalarizationSpec sc = scalarization.Normalized(spec.num_objectives());
  const NlpProblem p = BuildReplicated(spec, scenarios, sc, mode, warm);
  const NlpResult r = Solve(p, options);
  const Layout l = MakeLayout(spec, static_cast<int>(scenarios.size()), mode);

  std::vector<VectorXd> y;
  for (int k = 0; k < l.k; ++k) y.push_back(r.x.segment(l.y_offset(k), l.ny));
  ReplicatedSolution sol = EvaluateReplicated(spec, scenarios, mode, r.x.head(l.nx), y);
  if (!r.feasible(options.feas_tol)) {
    int worst_c = 0, worst_k = 0;
    if (sol.g.size() && sol.g.maxCoeff(&worst_c, &worst_k) > options.feas_tol) {
      throw Error(ErrorKind::kInfeasibleModel,
                  fmt::format("no scenario-feasible point found: constraint '{}' "
                              "violated by {:.3g} in scenario {}",
                              spec.constraint_names()[worst_c], sol.g(worst_c, worst_k),
                              sol.scenario_ids[worst_k]));
    }
    throw Error(ErrorKind::kInfeasibleModel,
                fmt::format("no point within the objective bounds found (violation {:.3g})", r.max_violation));
  }
  sol.status = r.status == NlpStatus::kOptimal ? NlpStatus::kOptimal
                                               : NlpStatus::kFeasibleSuboptimal;
  sol.iterations = r.iterations;
  sol.nlp_variables = p.n;

  ParetoPoint point;
  point.objectives = sol.t;
  point.scalarization = sc;
  for (const Scenario& s : scenarios) point.scenario_set_ids.push_back(s.id);
  point.solution = std::move(sol);
  return point;
}

std::vector<Scenario> SelectScenarios(const ReferenceDiscretization& reference,
                                      const std::vector<int>& ids) {
  std::vector<Scenario> out;
  out.reserve(ids.size());
  for (int id : ids) out.push_back(reference.ById(id));
  return out;
}

}  // namespace maro
