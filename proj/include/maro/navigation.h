#ifndef MARO_NAVIGATION_H_
#define MARO_NAVIGATION_H_

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "maro/price.h"

namespace maro {

// Everything a session reads; immutable once built and shared by all
// sessions over the same fronts.
struct NavigationData {
  FrontApproximation maro_front;
  FrontApproximation nominal_front;
  std::vector<NsrResult> nsr;  // one per MARO point
  std::vector<std::string> objective_names;
  std::vector<std::string> hnv_names;
  std::vector<std::string> wsv_names;
};

// Packs a priced MARO front for navigation; reports[i] must belong to
// maro_front.points[i].
NavigationData MakeNavigationData(const ProblemSpec& spec, const FrontApproximation& maro_front,
                                  const FrontApproximation& nominal_front,
                                  const std::vector<PriceReport>& reports);

struct Markers {
  VectorXd nsr;
  VectorXd mo;
  VectorXd price;
  bool d_zero = false;
  bool ray_misses_front = false;
};

struct SessionSnapshot {
  std::vector<std::pair<int, double>> lambda;
  VectorXd f_nav;
  Markers markers;
  VectorXd restrictions;  // +inf where unrestricted
  // Blends of the anchor points' variables, not re-optimized.
  VectorXd x;
  VectorXd y_nsr;
  VectorXd range_lo;
  VectorXd range_hi;
};

struct MoveOutcome {
  double requested = 0.0;
  double applied = 0.0;
  bool clamped = false;
};

class NavigationSession {
 public:
  // Starts at the middle of the front: the single middle point for an odd
  // count, the midpoint of the two middle points otherwise. Throws
  // kMissingNsr when the NSR data does not cover every MARO point.
  explicit NavigationSession(std::shared_ptr<const NavigationData> data);

  // Moves objective j to `target`, keeping the other objectives as close as
  // possible (least squares) to their current values under the
  // restrictions. Targets outside the reachable range are clamped.
  MoveOutcome Move(int objective, double target);

  // Sets an upper bound on objective j (+inf clears it). Throws
  // kInfeasibleRestrictions and leaves the session unchanged when no point
  // of the front satisfies all bounds.
  void SetRestriction(int objective, double bound);

  void Reset();

  SessionSnapshot Snapshot() const;
  const NavigationData& data() const { return *data_; }
  int ObjectiveIndex(const std::string& name) const;  // -1 when unknown

 private:
  struct Position {
    int segment = 0;  // left anchor
    double s = 0.0;   // share of the right anchor, in [0, 1)
  };

  VectorXd PointAt(const Position& p) const;
  bool FeasibleInterval(int segment, const VectorXd& bounds, double& lo, double& hi) const;
  bool Satisfies(const VectorXd& f, const VectorXd& bounds) const;
  Position Canonical(int segment, double s) const;
  Position Initial() const;
  void UpdateMarkers();

  std::shared_ptr<const NavigationData> data_;
  Position pos_;
  VectorXd restrictions_;
  Markers markers_;
};

}  // namespace maro

#endif  // MARO_NAVIGATION_H_
