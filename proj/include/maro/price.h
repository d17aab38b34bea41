#ifndef MARO_PRICE_H_
#define MARO_PRICE_H_

#include <utility>
#include <vector>

#include "maro/pareto_front.h"

namespace maro {

struct NsrResult {
  VectorXd y;
  VectorXd objectives;
  VectorXd constraints;
};

struct NsrOptions {
  // Upper bounds on the nominal objectives (normally the robust worst-case
  // values); empty for none.
  VectorXd caps;
  // Start for y; the problem's initial values when empty.
  VectorXd start;
  double feas_tol = 1e-6;
  NlpOptions nlp;
};

// Re-optimizes the wait-and-see variables at the nominal scenario for a
// fixed design: min_y w . F(x, y, u_nom) s.t. g <= 0 and F <= caps. Zero
// weights are resolved lexicographically so that no objective is left
// needlessly high. Throws kNsrInfeasible.
NsrResult SolveNsr(const ProblemSpec& spec, const VectorXd& x,
                   const ScalarizationSpec& preference, const NsrOptions& options = {});

// Preference implied by how a point was produced. A lexicographic extreme
// (finite caps) is attributed to its capped objectives, the remaining ones
// being resolved lexicographically by the NSR; otherwise the point's weights.
ScalarizationSpec DefaultPreference(const ParetoPoint& point);

struct RayIntersection {
  double alpha = 0.0;
  VectorXd point;
  int segment = -1;  // index of the left point of the hit segment
  // Convex-combination coefficients over the front points (at most two).
  std::vector<std::pair<int, double>> lambda;
  bool d_zero = false;
  bool ray_misses_front = false;
};

// Intersection of F + alpha d (alpha >= 0) with the piecewise-linear inner
// approximation of a bi-objective front, taking the largest alpha. A zero
// direction is replaced by the normalized diagonal (either sign) and
// flagged; a miss is reported with the nearest endpoint.
RayIntersection IntersectFront(const VectorXd& origin, const VectorXd& d,
                               const FrontApproximation& front);

struct PriceReport {
  VectorXd x_star;
  ScalarizationSpec preference;
  VectorXd f_maro;
  VectorXd f_nsr;
  VectorXd y_nsr;
  VectorXd d;
  double alpha_star = 0.0;
  VectorXd f_mo;
  VectorXd p_r;
  int segment = -1;
  std::vector<std::pair<int, double>> lambda;
  bool d_zero = false;
  bool ray_misses_front = false;
};

// Price of one robust point against a fixed nominal front. The preference
// defaults to DefaultPreference(robust_point).
PriceReport Price(const ProblemSpec& spec, const ParetoPoint& robust_point,
                  const FrontApproximation& nominal_front,
                  const ScalarizationSpec* preference = nullptr,
                  const NsrOptions& options = {});

// Price computed from an already solved NSR.
PriceReport PriceFromNsr(const ParetoPoint& robust_point, const ScalarizationSpec& preference,
                         const NsrResult& nsr, const FrontApproximation& nominal_front);

struct PriceFrontOptions {
  // Local refinement of the nominal front around every ray: extra
  // weighted-sum solves on the hit segment until its sandwich gap is at
  // most refine_gap or the per-ray budget is spent.
  bool refine = true;
  double refine_gap = 1e-9;
  int max_refine_solves = 40;
  NsrOptions nsr;
};

// Prices every point of a robust front. The nominal front is refined in
// place and all reports refer to its final state.
std::vector<PriceReport> PriceFront(const ProblemSpec& spec,
                                    const FrontApproximation& robust_front,
                                    FrontApproximation& nominal_front,
                                    const PointSolver& nominal_solver,
                                    const PriceFrontOptions& options = {});

}  // namespace maro

#endif  // MARO_PRICE_H_
