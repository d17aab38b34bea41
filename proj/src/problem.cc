#include "maro/problem.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include <fmt/format.h>

#include "maro/error.h"

namespace maro {

const char* ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kOutOfBounds: return "OutOfBounds";
    case ErrorKind::kNonFiniteEvaluation: return "NonFiniteEvaluation";
    case ErrorKind::kInvalidSpec: return "InvalidSpec";
    case ErrorKind::kDimensionTooLarge: return "DimensionTooLarge";
    case ErrorKind::kEmptyScenarioSet: return "EmptyScenarioSet";
    case ErrorKind::kInfeasibleModel: return "InfeasibleModel";
    case ErrorKind::kNsrInfeasible: return "NsrInfeasible";
    case ErrorKind::kDisjointRanges: return "DisjointRanges";
    case ErrorKind::kMissingNsr: return "MissingNsr";
    case ErrorKind::kInfeasibleRestrictions: return "InfeasibleRestrictions";
    case ErrorKind::kTargetOutOfRange: return "TargetOutOfRange";
    case ErrorKind::kSchema: return "SchemaError";
    case ErrorKind::kUsage: return "UsageError";
  }
  return "Error";
}

VectorXd UncertaintySet::Nominal() const {
  VectorXd v(dim());
  for (int i = 0; i < dim(); ++i) v[i] = params[i].nominal;
  return v;
}

VectorXd UncertaintySet::Lower() const {
  VectorXd v(dim());
  for (int i = 0; i < dim(); ++i) v[i] = params[i].lower;
  return v;
}

VectorXd UncertaintySet::Upper() const {
  VectorXd v(dim());
  for (int i = 0; i < dim(); ++i) v[i] = params[i].upper;
  return v;
}

bool UncertaintySet::Contains(const VectorXd& u, double tol) const {
  if (u.size() != dim()) return false;
  for (int i = 0; i < dim(); ++i) {
    const double slack = tol * std::max(1.0, std::abs(params[i].upper));
    if (!(u[i] >= params[i].lower - slack && u[i] <= params[i].upper + slack)) {
      return false;
    }
  }
  if (geometry == Geometry::kEllipsoid) {
    double s = 0.0;
    for (int i = 0; i < dim(); ++i) {
      const double z = (u[i] - center[i]) / radii[i];
      s += z * z;
    }
    if (s > 1.0 + tol) return false;
  }
  return true;
}

void Model::Jacobians(const VectorXd&, const VectorXd&, const VectorXd&,
                      ModelJacobians&) const {
  throw Error(ErrorKind::kInvalidSpec, "model does not provide gradients");
}

namespace {

void Require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::kInvalidSpec, what);
}

}  // namespace

ProblemSpec::ProblemSpec(std::string name, std::vector<VariableSpec> variables,
                         UncertaintySet uncertainty,
                         std::vector<std::string> objectives,
                         std::vector<std::string> constraints,
                         std::shared_ptr<const Model> model)
    : name_(std::move(name)),
      variables_(std::move(variables)),
      uncertainty_(std::move(uncertainty)),
      objective_names_(std::move(objectives)),
      constraint_names_(std::move(constraints)),
      model_(std::move(model)) {
  Require(model_ != nullptr, "problem has no evaluation model");
  Require(objective_names_.size() >= 2,
          "a multi-objective problem needs at least two objectives");
  for (int i = 0; i < static_cast<int>(variables_.size()); ++i) {
    const VariableSpec& v = variables_[i];
    Require(std::isfinite(v.lower) && std::isfinite(v.upper) && v.lower < v.upper,
            fmt::format("variable '{}': need finite lower < upper", v.name));
    Require(v.initial >= v.lower && v.initial <= v.upper,
            fmt::format("variable '{}': initial value outside bounds", v.name));
    (v.role == VariableRole::kHereAndNow ? hnv_ : wsv_).push_back(i);
  }
  Require(!hnv_.empty(), "at least one here-and-now variable is required");
  Require(uncertainty_.dim() >= 1, "at least one uncertain parameter is required");
  for (const UncertainParamSpec& p : uncertainty_.params) {
    Require(std::isfinite(p.lower) && std::isfinite(p.upper) &&
                p.lower <= p.nominal && p.nominal <= p.upper,
            fmt::format("uncertain parameter '{}': need lower <= nominal <= upper",
                        p.name));
  }
  if (uncertainty_.geometry == Geometry::kEllipsoid) {
    const int d = uncertainty_.dim();
    Require(uncertainty_.center.size() == d && uncertainty_.radii.size() == d,
            "ellipsoid center/radii dimension mismatch");
    for (int i = 0; i < d; ++i) {
      const UncertainParamSpec& p = uncertainty_.params[i];
      Require(uncertainty_.radii[i] > 0.0, "ellipsoid radii must be positive");
      Require(uncertainty_.center[i] >= p.lower && uncertainty_.center[i] <= p.upper,
              "ellipsoid center outside parameter bounds");
    }
    Require(uncertainty_.Contains(uncertainty_.Nominal()),
            "nominal scenario outside the ellipsoid");
  }
}

namespace {

VectorXd Gather(const std::vector<VariableSpec>& vars, const std::vector<int>& idx,
                double VariableSpec::*field) {
  VectorXd v(idx.size());
  for (size_t i = 0; i < idx.size(); ++i) v[i] = vars[idx[i]].*field;
  return v;
}

std::vector<std::string> Names(const std::vector<VariableSpec>& vars,
                               const std::vector<int>& idx) {
  std::vector<std::string> out;
  for (int i : idx) out.push_back(vars[i].name);
  return out;
}

}  // namespace

VectorXd ProblemSpec::HnvLower() const { return Gather(variables_, hnv_, &VariableSpec::lower); }
VectorXd ProblemSpec::HnvUpper() const { return Gather(variables_, hnv_, &VariableSpec::upper); }
VectorXd ProblemSpec::HnvInitial() const { return Gather(variables_, hnv_, &VariableSpec::initial); }
VectorXd ProblemSpec::WsvLower() const { return Gather(variables_, wsv_, &VariableSpec::lower); }
VectorXd ProblemSpec::WsvUpper() const { return Gather(variables_, wsv_, &VariableSpec::upper); }
VectorXd ProblemSpec::WsvInitial() const { return Gather(variables_, wsv_, &VariableSpec::initial); }
std::vector<std::string> ProblemSpec::HnvNames() const { return Names(variables_, hnv_); }
std::vector<std::string> ProblemSpec::WsvNames() const { return Names(variables_, wsv_); }

namespace {

void CheckDims(const ProblemSpec& spec, const VectorXd& x, const VectorXd& y,
               const VectorXd& u) {
  if (x.size() != spec.num_hnv() || y.size() != spec.num_wsv() ||
      u.size() != spec.num_params()) {
    throw Error(ErrorKind::kDimensionMismatch,
                fmt::format("expected (|x|,|y|,|u|) = ({},{},{}), got ({},{},{})",
                            spec.num_hnv(), spec.num_wsv(), spec.num_params(),
                            x.size(), y.size(), u.size()));
  }
}

void CheckBox(const VectorXd& v, const VectorXd& lo, const VectorXd& hi,
              const std::vector<std::string>& names) {
  for (int i = 0; i < v.size(); ++i) {
    if (!(v[i] >= lo[i] && v[i] <= hi[i])) {
      throw Error(ErrorKind::kOutOfBounds,
                  fmt::format("'{}' = {} outside [{}, {}]", names[i], v[i], lo[i],
                              hi[i]));
    }
  }
}

bool AllFinite(const VectorXd& v) { return v.allFinite(); }

}  // namespace

Evaluation Evaluate(const ProblemSpec& spec, const VectorXd& x,
                    const VectorXd& y, const VectorXd& u) {
  CheckDims(spec, x, y, u);
  CheckBox(x, spec.HnvLower(), spec.HnvUpper(), spec.HnvNames());
  CheckBox(y, spec.WsvLower(), spec.WsvUpper(), spec.WsvNames());
  if (!spec.uncertainty().Contains(u)) {
    throw Error(ErrorKind::kOutOfBounds, "scenario outside the uncertainty set");
  }
  Evaluation e;
  e.objectives.resize(spec.num_objectives());
  e.constraints.resize(spec.num_constraints());
  spec.model().Evaluate(x, y, u, e.objectives, e.constraints);
  if (e.objectives.size() != spec.num_objectives() ||
      e.constraints.size() != spec.num_constraints()) {
    throw Error(ErrorKind::kDimensionMismatch, "model output has wrong dimension");
  }
  if (!AllFinite(e.objectives) || !AllFinite(e.constraints)) {
    throw Error(ErrorKind::kNonFiniteEvaluation, "model returned NaN or Inf");
  }
  return e;
}

double FiniteDifferenceStep(double v) {
  return std::max(1e-6 * std::abs(v), 1e-8);
}

void FiniteDifferenceJacobians(const ProblemSpec& spec, const VectorXd& x,
                               const VectorXd& y, const VectorXd& u,
                               ModelJacobians& out) {
  const int m = spec.num_objectives();
  const int c = spec.num_constraints();
  const Model& model = spec.model();
  out.objectives.resize(m);
  out.constraints.resize(c);
  model.Evaluate(x, y, u, out.objectives, out.constraints);
  out.objectives_x.resize(m, x.size());
  out.constraints_x.resize(c, x.size());
  out.objectives_y.resize(m, y.size());
  out.constraints_y.resize(c, y.size());
  VectorXd fp(m), fm(m), gp(c), gm(c);
  VectorXd xs = x;
  for (int i = 0; i < x.size(); ++i) {
    const double h = FiniteDifferenceStep(x[i]);
    xs[i] = x[i] + h;
    model.Evaluate(xs, y, u, fp, gp);
    xs[i] = x[i] - h;
    model.Evaluate(xs, y, u, fm, gm);
    xs[i] = x[i];
    out.objectives_x.col(i) = (fp - fm) / (2 * h);
    out.constraints_x.col(i) = (gp - gm) / (2 * h);
  }
  VectorXd ys = y;
  for (int i = 0; i < y.size(); ++i) {
    const double h = FiniteDifferenceStep(y[i]);
    ys[i] = y[i] + h;
    model.Evaluate(x, ys, u, fp, gp);
    ys[i] = y[i] - h;
    model.Evaluate(x, ys, u, fm, gm);
    ys[i] = y[i];
    out.objectives_y.col(i) = (fp - fm) / (2 * h);
    out.constraints_y.col(i) = (gp - gm) / (2 * h);
  }
}

void EvaluateWithJacobians(const ProblemSpec& spec, const VectorXd& x,
                           const VectorXd& y, const VectorXd& u,
                           ModelJacobians& out) {
  if (!spec.model().HasGradients()) {
    FiniteDifferenceJacobians(spec, x, y, u, out);
    return;
  }
  const int m = spec.num_objectives();
  const int c = spec.num_constraints();
  out.objectives.resize(m);
  out.constraints.resize(c);
  out.objectives_x.resize(m, x.size());
  out.constraints_x.resize(c, x.size());
  out.objectives_y.resize(m, y.size());
  out.constraints_y.resize(c, y.size());
  spec.model().Jacobians(x, y, u, out);
}

VectorXd Gradient(const ProblemSpec& spec, const VectorXd& x, const VectorXd& y,
                  const VectorXd& u, OutputIndex target, Block wrt) {
  Evaluate(spec, x, y, u);  // bounds, dimensions, finiteness
  const bool objective = target.kind == OutputIndex::Kind::kObjective;
  const int limit = objective ? spec.num_objectives() : spec.num_constraints();
  if (target.index < 0 || target.index >= limit) {
    throw Error(ErrorKind::kDimensionMismatch, "gradient target index out of range");
  }
  ModelJacobians jac;
  EvaluateWithJacobians(spec, x, y, u, jac);
  const MatrixXd& m = objective ? (wrt == Block::kHnv ? jac.objectives_x
                                                      : jac.objectives_y)
                                : (wrt == Block::kHnv ? jac.constraints_x
                                                      : jac.constraints_y);
  VectorXd g = m.row(target.index).transpose();
  if (!g.allFinite()) {
    throw Error(ErrorKind::kNonFiniteEvaluation, "non-finite gradient");
  }
  return g;
}

}  // namespace maro
