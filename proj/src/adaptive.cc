#include "maro/adaptive.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "maro/error.h"

namespace maro {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct InnerSolution {
  double value = 0.0;
  bool feasible = true;
  VectorXd y;
};

VectorXd StartY(const ProblemSpec& spec, const Scenario& s,
                const ReferenceDiscretization& reference, const WarmStart* warm) {
  if (warm) {
    auto it = warm->y.find(s.id);
    if (it != warm->y.end()) return it->second;
    it = warm->y.find(reference.nominal().id);
    if (it != warm->y.end()) return it->second;
  }
  return spec.WsvInitial();
}

double MaxOf(const VectorXd& v) { return v.size() ? v.maxCoeff() : -kInf; }

// min_y f_j(x, y, u) s.t. g(x, y, u) <= 0.
InnerSolution InnerObjective(const ProblemSpec& spec, const VectorXd& x, const VectorXd& u,
                             int j, const VectorXd& y0, const AdaptiveOptions& opt,
                             const VectorXd* fixed_y) {
  InnerSolution out;
  if (fixed_y || spec.num_wsv() == 0) {
    out.y = fixed_y ? *fixed_y : VectorXd(0);
    const Evaluation e = Evaluate(spec, x, out.y, u);
    out.feasible = MaxOf(e.constraints) <= opt.feas_tol;
    out.value = out.feasible ? e.objectives[j] : kInf;
    return out;
  }
  NlpProblem p;
  p.n = spec.num_wsv();
  p.m = spec.num_constraints();
  p.lower = spec.WsvLower();
  p.upper = spec.WsvUpper();
  p.start = y0.cwiseMax(p.lower).cwiseMin(p.upper);
  p.evaluate = [&spec, &x, &u, j](const VectorXd& y, double& f, VectorXd& c, VectorXd* g,
                                   MatrixXd* jac) {
    ModelJacobians mj;
    if (g || jac) {
      EvaluateWithJacobians(spec, x, y, u, mj);
      if (g) *g = mj.objectives_y.row(j).transpose();
      if (jac) *jac = mj.constraints_y;
    } else {
      mj.objectives.resize(spec.num_objectives());
      mj.constraints.resize(spec.num_constraints());
      spec.model().Evaluate(x, y, u, mj.objectives, mj.constraints);
    }
    f = mj.objectives[j];
    c = mj.constraints;
  };
  const NlpResult r = Solve(p, opt.inner);
  out.y = r.x;
  out.feasible = r.feasible(opt.feas_tol);
  out.value = out.feasible ? Evaluate(spec, x, r.x, u).objectives[j] : kInf;
  return out;
}

// min_y max_c g_c(x, y, u) in epigraph form.
InnerSolution InnerConstraint(const ProblemSpec& spec, const VectorXd& x, const VectorXd& u,
                              const VectorXd& y0, const AdaptiveOptions& opt,
                              const VectorXd* fixed_y) {
  InnerSolution out;
  const int nc = spec.num_constraints();
  if (nc == 0) {
    out.value = -kInf;
    out.y = fixed_y ? *fixed_y : y0;
    return out;
  }
  if (fixed_y || spec.num_wsv() == 0) {
    out.y = fixed_y ? *fixed_y : VectorXd(0);
    out.value = Evaluate(spec, x, out.y, u).constraints.maxCoeff();
    return out;
  }
  const int ny = spec.num_wsv();
  const VectorXd ys = y0.cwiseMax(spec.WsvLower()).cwiseMin(spec.WsvUpper());
  const double v0 = Evaluate(spec, x, ys, u).constraints.maxCoeff();
  const double margin = std::max(1.0, std::abs(v0));
  NlpProblem p;
  p.n = ny + 1;
  p.m = nc;
  p.lower.resize(p.n);
  p.upper.resize(p.n);
  p.lower.head(ny) = spec.WsvLower();
  p.upper.head(ny) = spec.WsvUpper();
  p.lower[ny] = std::min(0.0, v0) - margin;
  p.upper[ny] = v0 + margin;
  p.start.resize(p.n);
  p.start.head(ny) = ys;
  p.start[ny] = v0;
  p.complete_start = [&spec, &x, &u, ny, lo = p.lower[ny], hi = p.upper[ny]](VectorXd& z) {
    VectorXd f(spec.num_objectives()), g(spec.num_constraints());
    spec.model().Evaluate(x, z.head(ny), u, f, g);
    if (g.allFinite()) z[ny] = std::clamp(g.maxCoeff(), lo, hi);
  };
  p.evaluate = [&spec, &x, &u, ny, nc](const VectorXd& z, double& f, VectorXd& c,
                                        VectorXd* g, MatrixXd* jac) {
    const VectorXd y = z.head(ny);
    ModelJacobians mj;
    if (jac) {
      EvaluateWithJacobians(spec, x, y, u, mj);
    } else {
      mj.objectives.resize(spec.num_objectives());
      mj.constraints.resize(nc);
      spec.model().Evaluate(x, y, u, mj.objectives, mj.constraints);
    }
    f = z[ny];
    c = mj.constraints.array() - z[ny];
    if (g) {
      g->setZero(ny + 1);
      (*g)[ny] = 1.0;
    }
    if (jac) {
      jac->resize(nc, ny + 1);
      jac->leftCols(ny) = mj.constraints_y;
      jac->col(ny).setConstant(-1.0);
    }
  };
  const NlpResult r = Solve(p, opt.inner);
  out.y = r.x.head(ny);
  // Report the true max at the returned y rather than the epigraph value.
  out.value = Evaluate(spec, x, out.y, u).constraints.maxCoeff();
  return out;
}

}  // namespace

WcScenarioSet WcScenarioSet::NominalOnly(const ReferenceDiscretization& reference) {
  WcScenarioSet s;
  s.Add(reference.nominal().id, "initial");
  return s;
}

bool WcScenarioSet::Contains(int id) const {
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

bool WcScenarioSet::Add(int id, const std::string& reason) {
  if (Contains(id)) return false;
  ids.push_back(id);
  provenance[id] = reason;
  return true;
}

const char* TerminationName(Termination t) {
  switch (t) {
    case Termination::kNoNewScenarios: return "no_new_scenarios";
    case Termination::kIterationCap: return "iteration_cap";
  }
  return "unknown";
}

ObjectiveWorstCase FindObjectiveWc(const ProblemSpec& spec, const VectorXd& x, int j,
                                   const ReferenceDiscretization& reference,
                                   const AdaptiveOptions& options, const WarmStart* warm,
                                   const VectorXd* fixed_y) {
  if (j < 0 || j >= spec.num_objectives()) {
    throw Error(ErrorKind::kOutOfBounds, fmt::format("no objective with index {}", j));
  }
  ObjectiveWorstCase wc;
  int best = -1;
  for (int k = 0; k < reference.size(); ++k) {
    const Scenario& s = reference.scenarios()[k];
    const InnerSolution in = InnerObjective(spec, x, s.values, j,
                                            StartY(spec, s, reference, warm), options, fixed_y);
    wc.values.push_back(in.value);
    if (best < 0) {
      best = k;
      continue;
    }
    const double top = wc.values[best];
    const double tol = std::isfinite(top) ? 1e-9 * std::max(1.0, std::abs(top)) : 0.0;
    if (in.value > top + tol ||
        (in.value >= top - tol && s.id < reference.scenarios()[best].id)) {
      best = k;
    }
  }
  wc.scenario_id = reference.scenarios()[best].id;
  wc.value = wc.values[best];
  wc.inner_infeasible = !std::isfinite(wc.value);
  return wc;
}

std::vector<double> ConstraintInnerOptima(const ProblemSpec& spec, const VectorXd& x,
                                          const ReferenceDiscretization& reference,
                                          const AdaptiveOptions& options,
                                          const WarmStart* warm, const VectorXd* fixed_y) {
  std::vector<double> out;
  for (const Scenario& s : reference.scenarios()) {
    out.push_back(InnerConstraint(spec, x, s.values, StartY(spec, s, reference, warm),
                                  options, fixed_y)
                      .value);
  }
  return out;
}

std::vector<ConstraintWorstCase> FindConstraintWc(const ProblemSpec& spec,
                                                  const VectorXd& x,
                                                  const ReferenceDiscretization& reference,
                                                  const AdaptiveOptions& options,
                                                  const WarmStart* warm,
                                                  const VectorXd* fixed_y) {
  std::vector<ConstraintWorstCase> per_constraint(spec.num_constraints());
  std::vector<bool> found(spec.num_constraints(), false);
  for (const Scenario& s : reference.scenarios()) {
    const InnerSolution in = InnerConstraint(spec, x, s.values,
                                             StartY(spec, s, reference, warm), options, fixed_y);
    if (!(in.value > options.feas_tol)) continue;
    const Evaluation e = Evaluate(spec, x, in.y, s.values);
    int c = 0;
    e.constraints.maxCoeff(&c);
    ConstraintWorstCase& slot = per_constraint[c];
    const double tol = 1e-9 * std::max(1.0, std::abs(slot.violation));
    if (!found[c] || in.value > slot.violation + tol ||
        (in.value >= slot.violation - tol && s.id < slot.scenario_id)) {
      slot = {c, s.id, in.value};
      found[c] = true;
    }
  }
  std::vector<ConstraintWorstCase> out;
  for (int c = 0; c < spec.num_constraints(); ++c) {
    if (found[c]) out.push_back(per_constraint[c]);
  }
  return out;
}

long ReplicatedWork(const ProblemSpec& spec, const ParetoPoint& point) {
  const int blocks = point.solution.mode == SolveMode::kNonAdjustable
                         ? 1
                         : static_cast<int>(point.solution.scenario_ids.size());
  return static_cast<long>(blocks) * spec.num_wsv();
}

namespace {

WarmStart WarmFrom(const ParetoPoint& p) {
  WarmStart w;
  w.x = p.solution.x;
  for (size_t k = 0; k < p.solution.scenario_ids.size(); ++k) {
    w.y[p.solution.scenario_ids[k]] = p.solution.y[k];
  }
  return w;
}

}  // namespace

Certificate CertifyAgainstReference(const ProblemSpec& spec,
                                    const ReferenceDiscretization& reference,
                                    const ParetoPoint& point,
                                    const AdaptiveOptions& options) {
  const ReplicatedSolution& s = point.solution;
  const WarmStart warm = WarmFrom(point);
  const VectorXd* fixed_y = s.mode == SolveMode::kNonAdjustable ? &s.y[0] : nullptr;
  Certificate cert;
  cert.objective_excess.resize(spec.num_objectives());
  for (int j = 0; j < spec.num_objectives(); ++j) {
    const ObjectiveWorstCase wc =
        FindObjectiveWc(spec, s.x, j, reference, options, &warm, fixed_y);
    cert.objective_excess[j] = wc.value - s.t[j];
  }
  for (double v : ConstraintInnerOptima(spec, s.x, reference, options, &warm, fixed_y)) {
    cert.max_violation = std::max(cert.max_violation, v);
  }
  return cert;
}

std::pair<ParetoPoint, RefinementTrace> SolveAdaptivePoint(
    const ProblemSpec& spec, const ReferenceDiscretization& reference,
    const ScalarizationSpec& scalarization, const WcScenarioSet& initial, SolveMode mode,
    const AdaptiveOptions& options, const WarmStart* warm) {
  if (mode == SolveMode::kNominal) {
    throw Error(ErrorKind::kInvalidSpec, "adaptive refinement needs a robust mode");
  }
  if (initial.ids.empty()) {
    throw Error(ErrorKind::kEmptyScenarioSet, "initial scenario set is empty");
  }
  for (int id : initial.ids) reference.ById(id);

  RefinementTrace trace;
  trace.final_set = initial;
  WarmStart current;
  bool have_warm = warm != nullptr;
  if (warm) current = *warm;
  ParetoPoint last;
  trace.terminated = Termination::kIterationCap;
  for (int alt = 0; alt < options.max_alternations; ++alt) {
    last = SolvePoint(spec, SelectScenarios(reference, trace.final_set.ids), scalarization,
                      mode, have_warm ? &current : nullptr, options.nlp);
    trace.replicated_work += ReplicatedWork(spec, last);
    const ReplicatedSolution& sol = last.solution;
    const WarmStart master = WarmFrom(last);
    const VectorXd* fixed_y = mode == SolveMode::kNonAdjustable ? &sol.y[0] : nullptr;

    RefinementIteration it;
    it.objectives = last.objectives;
    it.scenario_ids = trace.final_set.ids;
    it.status = sol.status;
    it.objective_wc_values.resize(spec.num_objectives());
    for (int j = 0; j < spec.num_objectives(); ++j) {
      const ObjectiveWorstCase wc =
          FindObjectiveWc(spec, sol.x, j, reference, options, &master, fixed_y);
      it.objective_wc_values[j] = wc.value;
      it.objective_wc_ids.push_back(wc.scenario_id);
      if (wc.value > sol.t[j] + options.add_tol &&
          trace.final_set.Add(wc.scenario_id, "objective:" + spec.objective_names()[j])) {
        it.added.push_back(wc.scenario_id);
      }
    }
    it.constraint_wc_violations = VectorXd::Zero(spec.num_constraints());
    for (const ConstraintWorstCase& c :
         FindConstraintWc(spec, sol.x, reference, options, &master, fixed_y)) {
      it.constraint_wc_violations[c.constraint] = c.violation;
      if (trace.final_set.Add(c.scenario_id,
                              "constraint:" + spec.constraint_names()[c.constraint])) {
        it.added.push_back(c.scenario_id);
      }
    }
    const bool done = it.added.empty();
    trace.iterations.push_back(std::move(it));
    if (done) {
      trace.terminated = Termination::kNoNewScenarios;
      break;
    }
    current = master;
    have_warm = true;
  }
  if (trace.terminated == Termination::kIterationCap) {
    // The last additions were never solved; report the set that was.
    trace.final_set.ids = trace.iterations.back().scenario_ids;
    for (auto it = trace.final_set.provenance.begin();
         it != trace.final_set.provenance.end();) {
      it = trace.final_set.Contains(it->first) ? std::next(it)
                                               : trace.final_set.provenance.erase(it);
    }
  }
  return {std::move(last), std::move(trace)};
}

AdaptiveFrontSolver::AdaptiveFrontSolver(const ProblemSpec& spec,
                                         const ReferenceDiscretization& reference,
                                         SolveMode mode, AdaptiveOptions options)
    : spec_(spec),
      reference_(reference),
      mode_(mode),
      options_(std::move(options)),
      union_(WcScenarioSet::NominalOnly(reference)) {}

ParetoPoint AdaptiveFrontSolver::operator()(const ScalarizationSpec& scalarization) {
  auto [point, trace] = SolveAdaptivePoint(spec_, reference_, scalarization, union_, mode_,
                                           options_, have_warm_ ? &warm_ : nullptr);
  for (int id : trace.final_set.ids) union_.Add(id, trace.final_set.provenance.at(id));
  work_ += trace.replicated_work;
  traces_.push_back(std::move(trace));
  warm_ = WarmFrom(point);
  have_warm_ = true;
  return point;
}

AllScenarioSolver::AllScenarioSolver(const ProblemSpec& spec,
                                     const ReferenceDiscretization& reference,
                                     SolveMode mode, NlpOptions options)
    : spec_(spec), reference_(reference), mode_(mode), options_(std::move(options)) {}

ParetoPoint AllScenarioSolver::operator()(const ScalarizationSpec& scalarization) {
  const std::vector<Scenario> all =
      mode_ == SolveMode::kNominal ? std::vector<Scenario>{reference_.nominal()}
                                   : reference_.scenarios();
  ParetoPoint p = SolvePoint(spec_, all, scalarization, mode_, nullptr, options_);
  work_ += ReplicatedWork(spec_, p);
  return p;
}

}  // namespace maro
