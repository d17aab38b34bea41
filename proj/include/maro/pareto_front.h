#ifndef MARO_PARETO_FRONT_H_
#define MARO_PARETO_FRONT_H_

#include <functional>
#include <string>
#include <vector>

#include "maro/replicated.h"

namespace maro {

// Solves one scalarized problem; fronts are built from repeated calls.
using PointSolver = std::function<ParetoPoint(const ScalarizationSpec&)>;

// Affine map of objective space onto [0, 1] per objective, from ideal and
// nadir estimates. Degenerate ranges map with unit scale.
struct Normalization {
  VectorXd ideal;
  VectorXd nadir;

  VectorXd Range() const;
  VectorXd Apply(const VectorXd& f) const;
  VectorXd Undo(const VectorXd& normalized) const;
  // Converts weights given in normalized space to raw-objective weights.
  VectorXd RawWeights(const VectorXd& normalized_weights) const;
};

struct ExtremeCompromises {
  std::vector<ParetoPoint> points;  // points[j] minimizes objective j first
};

// Lexicographic optima for M = 2: minimize f_j, then the other objective
// subject to f_j <= optimum + tol * max(1, |optimum|). The cap is widened
// tenfold twice if the second stage has no feasible solution; after that the
// first-stage optimum is kept.
ExtremeCompromises ComputeExtremeCompromises(const PointSolver& solver,
                                             int num_objectives = 2, double tol = 1e-6);

struct FrontApproximation {
  SolveMode mode = SolveMode::kAdjustable;
  std::vector<ParetoPoint> points;  // strictly ascending in objective 1
  Normalization normalization;
  // Per segment i (between points i and i+1): normalized gap between the
  // inner approximation and the local outer bound, and whether that bound
  // is still a valid certificate.
  std::vector<double> segment_gaps;
  std::vector<bool> segment_certified;
  double max_gap = 0.0;
  std::vector<double> gap_history;  // max certified gap after each step
  std::vector<std::string> warnings;
  int solves = 0;  // weighted-sum solves beyond the extreme compromises
  // Raw weights of the supporting lines at each point that bound the
  // segments to its left and right, and whether they are trusted.
  std::vector<VectorXd> left_support;
  std::vector<VectorXd> right_support;
  std::vector<bool> support_valid;

  int size() const { return static_cast<int>(points.size()); }
  MatrixXd Objectives() const;  // size() x M
  // Inner approximation: objective 2 as a piecewise-linear function of
  // objective 1. Throws kOutOfBounds outside the front's range.
  double InterpolateSecond(double f1) const;
  bool Certified() const;
};

struct SandwichOptions {
  double eps = 0.01;
  int max_solves = 20;
};

FrontApproximation Sandwich(const PointSolver& solver, SolveMode mode,
                            const SandwichOptions& options = {});

// Interior weights w1 = k / (count - 1) for k = count - 2, ..., 1, i.e. the
// count - 2 interior points of an evenly spaced raw-weight schedule.
std::vector<ScalarizationSpec> InteriorWeights(int count);

// Extreme compromises followed by one solve per scheduled weight.
FrontApproximation FrontFromSchedule(const PointSolver& solver, SolveMode mode,
                                     const std::vector<ScalarizationSpec>& schedule);

// Sorts, removes duplicates and dominated points, and recomputes segment
// data from the stored supports (or each point's weights when absent).
void AssembleFront(FrontApproximation& front);

// One sandwich step on the given segment: a weighted-sum solve along the
// segment normal, inserted with its support. Returns false when the segment
// index is invalid or its endpoints coincide.
bool RefineSegment(FrontApproximation& front, int segment, const PointSolver& solver);

// Pushes one end of the front outward: a weighted-sum solve whose normal is
// ten times steeper than that of the outermost segment. `right` selects the
// end with the largest objective 1. Returns false when the solve adds no
// new point; repeated calls walk further out.
bool ExtendEnd(FrontApproximation& front, bool right, const PointSolver& solver);

struct DominanceReport {
  double max_exceedance = 0.0;  // normalized; positive when a lies above b
  double at_f1 = 0.0;           // raw objective-1 value of the maximum
  double range_lo = 0.0;
  double range_hi = 0.0;
};

// Maximum signed vertical distance of a's inner approximation above b's over
// the shared objective-1 range, measured in the given normalization. Throws
// kDisjointRanges.
DominanceReport DominanceCheck(const FrontApproximation& a, const FrontApproximation& b,
                               const Normalization& normalization);

}  // namespace maro

#endif  // MARO_PARETO_FRONT_H_
