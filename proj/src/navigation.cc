#include "maro/navigation.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "maro/error.h"

namespace maro {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSnap = 1e-12;

double BoundTol(double r) { return 1e-12 * std::max(1.0, std::abs(r)); }

// Blend of per-point vectors over the (at most two) weighted anchors.
template <typename Get>
VectorXd Blend(const std::vector<std::pair<int, double>>& lambda, Get get) {
  VectorXd out = get(lambda[0].first);
  if (lambda.size() == 1 || out.size() == 0) return out;
  return lambda[0].second * out + lambda[1].second * get(lambda[1].first);
}

std::vector<std::pair<int, double>> Lambda(int segment, double s) {
  if (s == 0.0) return {{segment, 1.0}};
  return {{segment, 1.0 - s}, {segment + 1, s}};
}

}  // namespace

NavigationData MakeNavigationData(const ProblemSpec& spec, const FrontApproximation& maro_front,
                                  const FrontApproximation& nominal_front,
                                  const std::vector<PriceReport>& reports) {
  if (reports.size() != maro_front.points.size()) {
    throw Error(ErrorKind::kMissingNsr,
                fmt::format("{} price reports for {} MARO points", reports.size(),
                            maro_front.points.size()));
  }
  NavigationData d;
  d.maro_front = maro_front;
  d.nominal_front = nominal_front;
  for (const PriceReport& r : reports) {
    NsrResult n;
    n.y = r.y_nsr;
    n.objectives = r.f_nsr;
    d.nsr.push_back(n);
  }
  d.objective_names = spec.objective_names();
  d.hnv_names = spec.HnvNames();
  d.wsv_names = spec.WsvNames();
  return d;
}

NavigationSession::NavigationSession(std::shared_ptr<const NavigationData> data)
    : data_(std::move(data)) {
  if (!data_ || data_->maro_front.points.empty()) {
    throw Error(ErrorKind::kInvalidSpec, "navigation needs a non-empty MARO front");
  }
  if (data_->nominal_front.points.empty()) {
    throw Error(ErrorKind::kInvalidSpec, "navigation needs a non-empty nominal front");
  }
  const int n = data_->maro_front.size();
  const int m = static_cast<int>(data_->maro_front.points[0].objectives.size());
  if (static_cast<int>(data_->nsr.size()) != n) {
    throw Error(ErrorKind::kMissingNsr,
                fmt::format("NSR results cover {} of {} MARO points", data_->nsr.size(), n));
  }
  for (int i = 0; i < n; ++i) {
    if (data_->nsr[i].objectives.size() != m) {
      throw Error(ErrorKind::kMissingNsr, fmt::format("no NSR objectives for MARO point {}", i));
    }
  }
  restrictions_ = VectorXd::Constant(m, kInf);
  pos_ = Initial();
  UpdateMarkers();
}

NavigationSession::Position NavigationSession::Initial() const {
  const int n = data_->maro_front.size();
  if (n % 2 == 1) return {n / 2, 0.0};
  return {n / 2 - 1, 0.5};
}

VectorXd NavigationSession::PointAt(const Position& p) const {
  const auto& pts = data_->maro_front.points;
  if (p.s == 0.0) return pts[p.segment].objectives;
  return (1.0 - p.s) * pts[p.segment].objectives + p.s * pts[p.segment + 1].objectives;
}

NavigationSession::Position NavigationSession::Canonical(int segment, double s) const {
  if (s <= kSnap) return {segment, 0.0};
  if (s >= 1.0 - kSnap) return {segment + 1, 0.0};
  return {segment, s};
}

bool NavigationSession::Satisfies(const VectorXd& f, const VectorXd& bounds) const {
  for (int k = 0; k < f.size(); ++k) {
    if (f[k] > bounds[k] + BoundTol(bounds[k])) return false;
  }
  return true;
}

bool NavigationSession::FeasibleInterval(int segment, const VectorXd& bounds, double& lo,
                                         double& hi) const {
  const auto& pts = data_->maro_front.points;
  const VectorXd& a = pts[segment].objectives;
  const bool single = segment + 1 >= static_cast<int>(pts.size());
  const VectorXd e = single ? VectorXd(VectorXd::Zero(a.size()))
                            : VectorXd(pts[segment + 1].objectives - a);
  lo = 0.0;
  hi = single ? 0.0 : 1.0;
  for (int k = 0; k < a.size(); ++k) {
    if (!std::isfinite(bounds[k])) continue;
    const double r = bounds[k] + BoundTol(bounds[k]);
    if (e[k] == 0.0) {
      if (a[k] > r) return false;
    } else if (e[k] > 0.0) {
      hi = std::min(hi, (r - a[k]) / e[k]);
    } else {
      lo = std::max(lo, (r - a[k]) / e[k]);
    }
  }
  return lo <= hi;
}

MoveOutcome NavigationSession::Move(int objective, double target) {
  const int m = static_cast<int>(restrictions_.size());
  if (objective < 0 || objective >= m) {
    throw Error(ErrorKind::kOutOfBounds, fmt::format("no objective with index {}", objective));
  }
  if (!std::isfinite(target)) {
    throw Error(ErrorKind::kTargetOutOfRange, "slider target must be finite");
  }
  const auto& pts = data_->maro_front.points;
  const int segments = std::max(1, static_cast<int>(pts.size()) - 1);
  const VectorXd prev = PointAt(pos_);
  const int j = objective;

  auto project = [&](double value, Position& out) {
    double best = kInf;
    for (int i = 0; i < segments; ++i) {
      double lo, hi;
      if (!FeasibleInterval(i, restrictions_, lo, hi)) continue;
      const VectorXd& a = pts[i].objectives;
      const VectorXd e = i + 1 < static_cast<int>(pts.size())
                             ? VectorXd(pts[i + 1].objectives - a)
                             : VectorXd(VectorXd::Zero(m));
      double s;
      if (e[j] != 0.0) {
        s = (value - a[j]) / e[j];
        if (s < lo - kSnap || s > hi + kSnap) continue;
        s = std::clamp(s, lo, hi);
      } else {
        if (std::abs(a[j] - value) > BoundTol(value)) continue;
        double num = 0.0, den = 0.0;
        for (int k = 0; k < m; ++k) {
          if (k == j) continue;
          num += (a[k] - prev[k]) * e[k];
          den += e[k] * e[k];
        }
        s = den > 0.0 ? std::clamp(-num / den, lo, hi) : lo;
      }
      double cost = 0.0;
      for (int k = 0; k < m; ++k) {
        if (k != j) cost += std::pow(a[k] + s * e[k] - prev[k], 2);
      }
      if (cost < best) {
        best = cost;
        out = Canonical(i, s);
      }
    }
    return best < kInf;
  };

  MoveOutcome outcome{target, target, false};
  Position next;
  if (!project(target, next)) {
    double mn = kInf, mx = -kInf;
    for (int i = 0; i < segments; ++i) {
      double lo, hi;
      if (!FeasibleInterval(i, restrictions_, lo, hi)) continue;
      for (double s : {lo, hi}) {
        const double v = PointAt({i, s})[j];
        mn = std::min(mn, v);
        mx = std::max(mx, v);
      }
    }
    if (mn > mx) {
      throw Error(ErrorKind::kInfeasibleRestrictions, "restrictions exclude the whole front");
    }
    outcome.applied = std::clamp(target, mn, mx);
    outcome.clamped = true;
    if (!project(outcome.applied, next)) {
      throw Error(ErrorKind::kTargetOutOfRange,
                  fmt::format("target {} for objective {} is not reachable", target, j));
    }
  }
  pos_ = next;
  UpdateMarkers();
  return outcome;
}

void NavigationSession::SetRestriction(int objective, double bound) {
  const int m = static_cast<int>(restrictions_.size());
  if (objective < 0 || objective >= m) {
    throw Error(ErrorKind::kOutOfBounds, fmt::format("no objective with index {}", objective));
  }
  if (std::isnan(bound)) {
    throw Error(ErrorKind::kOutOfBounds, "restriction bound must not be NaN");
  }
  VectorXd bounds = restrictions_;
  bounds[objective] = bound;
  const int segments = std::max(1, data_->maro_front.size() - 1);
  bool any = false;
  for (int i = 0; i < segments && !any; ++i) {
    double lo, hi;
    any = FeasibleInterval(i, bounds, lo, hi);
  }
  if (!any) {
    throw Error(ErrorKind::kInfeasibleRestrictions,
                fmt::format("bound {} on objective {} excludes every point of the front", bound,
                            objective));
  }
  restrictions_ = bounds;
  if (!Satisfies(PointAt(pos_), restrictions_)) Move(objective, bound);
}

void NavigationSession::Reset() {
  restrictions_.setConstant(kInf);
  pos_ = Initial();
  UpdateMarkers();
}

void NavigationSession::UpdateMarkers() {
  const auto lambda = Lambda(pos_.segment, pos_.s);
  const auto& pts = data_->maro_front.points;
  ParetoPoint nav;
  nav.objectives = Blend(lambda, [&](int i) { return pts[i].objectives; });
  nav.solution.x = Blend(lambda, [&](int i) { return pts[i].solution.x; });
  NsrResult nsr;
  nsr.objectives = Blend(lambda, [&](int i) { return data_->nsr[i].objectives; });
  nsr.y = Blend(lambda, [&](int i) { return data_->nsr[i].y; });
  nsr.constraints = Blend(lambda, [&](int i) { return data_->nsr[i].constraints; });
  ScalarizationSpec pref;
  pref.weights = Blend(lambda, [&](int i) { return pts[i].scalarization.weights; });
  const PriceReport r = PriceFromNsr(nav, pref, nsr, data_->nominal_front);
  markers_.nsr = r.f_nsr;
  markers_.mo = r.f_mo;
  markers_.price = r.p_r;
  markers_.d_zero = r.d_zero;
  markers_.ray_misses_front = r.ray_misses_front;
}

SessionSnapshot NavigationSession::Snapshot() const {
  SessionSnapshot snap;
  snap.lambda = Lambda(pos_.segment, pos_.s);
  const auto& pts = data_->maro_front.points;
  snap.f_nav = PointAt(pos_);
  snap.markers = markers_;
  snap.restrictions = restrictions_;
  snap.x = Blend(snap.lambda, [&](int i) { return pts[i].solution.x; });
  snap.y_nsr = Blend(snap.lambda, [&](int i) { return data_->nsr[i].y; });
  const MatrixXd f = data_->maro_front.Objectives();
  snap.range_lo = f.colwise().minCoeff().transpose();
  snap.range_hi = f.colwise().maxCoeff().transpose();
  return snap;
}

int NavigationSession::ObjectiveIndex(const std::string& name) const {
  const auto& names = data_->objective_names;
  const auto it = std::find(names.begin(), names.end(), name);
  return it == names.end() ? -1 : static_cast<int>(it - names.begin());
}

}  // namespace maro
