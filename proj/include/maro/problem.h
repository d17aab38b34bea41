#ifndef MARO_PROBLEM_H_
#define MARO_PROBLEM_H_

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace maro {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class VariableRole { kHereAndNow, kWaitAndSee };

struct VariableSpec {
  std::string name;
  double lower = 0.0;
  double upper = 1.0;
  VariableRole role = VariableRole::kHereAndNow;
  double initial = 0.0;
};

struct UncertainParamSpec {
  std::string name;
  double lower = 0.0;
  double upper = 0.0;
  double nominal = 0.0;
};

enum class Geometry { kBox, kEllipsoid };

struct UncertaintySet {
  std::vector<UncertainParamSpec> params;
  Geometry geometry = Geometry::kBox;
  // Only meaningful for kEllipsoid.
  VectorXd center;
  VectorXd radii;

  int dim() const { return static_cast<int>(params.size()); }
  VectorXd Nominal() const;
  VectorXd Lower() const;
  VectorXd Upper() const;
  // Box bounds always; for ellipsoids additionally the ellipsoid itself.
  bool Contains(const VectorXd& u, double tol = 1e-9) const;
};

// Values and first derivatives of all model outputs at one point. Row j of
// `objectives_x` is the gradient of objective j with respect to the
// here-and-now block, and so on.
struct ModelJacobians {
  VectorXd objectives;
  VectorXd constraints;
  MatrixXd objectives_x;
  MatrixXd objectives_y;
  MatrixXd constraints_x;
  MatrixXd constraints_y;
};

// The evaluation contract. Implementations must be pure and safe to call
// concurrently. Constraint values are feasible when <= 0.
class Model {
 public:
  virtual ~Model() = default;

  virtual void Evaluate(const VectorXd& x, const VectorXd& y,
                        const VectorXd& u, VectorXd& objectives,
                        VectorXd& constraints) const = 0;

  virtual bool HasGradients() const { return false; }

  // Only called when HasGradients() is true. Output matrices are already
  // sized by the caller.
  virtual void Jacobians(const VectorXd& x, const VectorXd& y,
                         const VectorXd& u, ModelJacobians& out) const;
};

class ProblemSpec {
 public:
  ProblemSpec(std::string name, std::vector<VariableSpec> variables,
              UncertaintySet uncertainty, std::vector<std::string> objectives,
              std::vector<std::string> constraints,
              std::shared_ptr<const Model> model);

  const std::string& name() const { return name_; }
  const std::vector<VariableSpec>& variables() const { return variables_; }
  const UncertaintySet& uncertainty() const { return uncertainty_; }
  const std::vector<std::string>& objective_names() const {
    return objective_names_;
  }
  const std::vector<std::string>& constraint_names() const {
    return constraint_names_;
  }
  const Model& model() const { return *model_; }
  std::shared_ptr<const Model> shared_model() const { return model_; }

  int num_objectives() const { return static_cast<int>(objective_names_.size()); }
  int num_constraints() const {
    return static_cast<int>(constraint_names_.size());
  }
  int num_hnv() const { return static_cast<int>(hnv_.size()); }
  int num_wsv() const { return static_cast<int>(wsv_.size()); }
  int num_params() const { return uncertainty_.dim(); }

  // Indices into variables(), in declaration order.
  const std::vector<int>& hnv_indices() const { return hnv_; }
  const std::vector<int>& wsv_indices() const { return wsv_; }

  VectorXd HnvLower() const;
  VectorXd HnvUpper() const;
  VectorXd HnvInitial() const;
  VectorXd WsvLower() const;
  VectorXd WsvUpper() const;
  VectorXd WsvInitial() const;
  std::vector<std::string> HnvNames() const;
  std::vector<std::string> WsvNames() const;

 private:
  std::string name_;
  std::vector<VariableSpec> variables_;
  UncertaintySet uncertainty_;
  std::vector<std::string> objective_names_;
  std::vector<std::string> constraint_names_;
  std::shared_ptr<const Model> model_;
  std::vector<int> hnv_;
  std::vector<int> wsv_;
};

struct Evaluation {
  VectorXd objectives;
  VectorXd constraints;
};

// Checked evaluation: bounds and dimensions are validated first and
// non-finite model output raises kNonFiniteEvaluation.
Evaluation Evaluate(const ProblemSpec& spec, const VectorXd& x,
                    const VectorXd& y, const VectorXd& u);

struct OutputIndex {
  enum class Kind { kObjective, kConstraint };
  Kind kind = Kind::kObjective;
  int index = 0;

  static OutputIndex Objective(int j) { return {Kind::kObjective, j}; }
  static OutputIndex Constraint(int c) { return {Kind::kConstraint, c}; }
};

enum class Block { kHnv, kWsv };

VectorXd Gradient(const ProblemSpec& spec, const VectorXd& x, const VectorXd& y,
                  const VectorXd& u, OutputIndex target, Block wrt);

// Relative central-difference step used whenever a model has no analytic
// gradients.
double FiniteDifferenceStep(double v);

// Values plus all Jacobians, analytic when the model provides them and
// central differences otherwise. Unchecked: solvers call this on points that
// they keep inside the box themselves.
void EvaluateWithJacobians(const ProblemSpec& spec, const VectorXd& x,
                           const VectorXd& y, const VectorXd& u,
                           ModelJacobians& out);

// Central-difference Jacobians regardless of analytic support; the oracle
// side of the gradient cross-check.
void FiniteDifferenceJacobians(const ProblemSpec& spec, const VectorXd& x,
                               const VectorXd& y, const VectorXd& u,
                               ModelJacobians& out);

}  // namespace maro

#endif  // MARO_PROBLEM_H_
