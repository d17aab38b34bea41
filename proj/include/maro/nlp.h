#ifndef MARO_NLP_H_
#define MARO_NLP_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace maro {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// min f(z)  s.t.  c(z) <= 0,  lower <= z <= upper.
struct NlpProblem {
  int n = 0;
  int m = 0;
  VectorXd lower;
  VectorXd upper;
  // Per-coordinate working scale; defaults to upper - lower when empty.
  VectorXd scale;
  // Fills f and c; fills the gradient and the m x n Jacobian when the
  // pointers are non-null. Non-finite output (or a thrown
  // kNonFiniteEvaluation) marks the point as infeasible.
  std::function<void(const VectorXd& z, double& f, VectorXd& c,
                     VectorXd* grad, MatrixXd* jac)>
      evaluate;
  VectorXd start;
  // Optional repair of a sampled multistart point (e.g. epigraph variables
  // derived from the sampled decisions).
  std::function<void(VectorXd& z)> complete_start;
};

enum class NlpStatus { kOptimal, kFeasibleSuboptimal, kInfeasible, kIterationLimit };

const char* NlpStatusName(NlpStatus status);

struct NlpIterate {
  int start = 0;
  int outer = 0;
  double f = 0.0;
  double violation = 0.0;
  double penalty = 0.0;
};

struct NlpOptions {
  double feas_tol = 1e-6;
  // A final point with violation in (target_violation, feas_tol] gets a
  // feasibility correction towards target_violation.
  double target_violation = 1e-9;
  double opt_tol = 1e-6;
  int max_outer = 500;
  int max_inner = 2000;
  int multistart = 5;  // provided start + (multistart - 1) Latin-hypercube points
  std::uint32_t seed = 42;
  double penalty_init = 10.0;
  double penalty_growth = 10.0;
  double penalty_max = 1e8;
  std::function<void(const NlpIterate&)> on_iteration;
};

struct NlpResult {
  VectorXd x;
  double f = 0.0;
  double max_violation = 0.0;
  NlpStatus status = NlpStatus::kInfeasible;
  int iterations = 0;
  double stationarity = 0.0;
  VectorXd multipliers;
  int start_index = 0;
  // Max violation after every accepted outer iteration of the winning start.
  std::vector<double> violation_history;

  bool feasible(double feas_tol = 1e-6) const { return max_violation <= feas_tol; }
};

// Penalty value substituted for non-finite model output.
inline constexpr double kNonFinitePenalty = 1e10;

NlpResult Solve(const NlpProblem& problem, const NlpOptions& options = {});

}  // namespace maro

#endif  // MARO_NLP_H_
