#include "maro/pareto_front.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include <fmt/format.h>

#include "maro/error.h"

namespace maro {

VectorXd Normalization::Range() const {
  VectorXd r = nadir - ideal;
  for (int j = 0; j < r.size(); ++j) {
    if (!(r[j] > 1e-12)) r[j] = 1.0;
  }
  return r;
}

VectorXd Normalization::Apply(const VectorXd& f) const {
  return (f - ideal).cwiseQuotient(Range());
}

VectorXd Normalization::Undo(const VectorXd& normalized) const {
  return ideal + normalized.cwiseProduct(Range());
}

VectorXd Normalization::RawWeights(const VectorXd& normalized_weights) const {
  VectorXd w = normalized_weights.cwiseQuotient(Range());
  return w / w.sum();
}

ExtremeCompromises ComputeExtremeCompromises(const PointSolver& solver, int num_objectives,
                                             double tol) {
  if (num_objectives != 2) {
    throw Error(ErrorKind::kInvalidSpec, "extreme compromises need exactly two objectives");
  }
  ExtremeCompromises out;
  for (int j = 0; j < 2; ++j) {
    const ParetoPoint first = solver(ScalarizationSpec::WeightedSum(VectorXd::Unit(2, j)));
    ScalarizationSpec second = ScalarizationSpec::WeightedSum(VectorXd::Unit(2, 1 - j));
    second.caps = VectorXd::Constant(2, std::numeric_limits<double>::infinity());
    // A nearly flat front end makes the capped problem close to degenerate;
    // widen the cap before giving up on the second stage.
    std::optional<ParetoPoint> polished;
    for (double widen : {1.0, 10.0, 100.0}) {
      second.caps[j] = first.objectives[j] + widen * tol * std::max(1.0, std::abs(first.objectives[j]));
      try {
        polished = solver(second);
        break;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kInfeasibleModel) throw;
      }
    }
    out.points.push_back(polished ? *polished : first);
  }
  return out;
}

MatrixXd FrontApproximation::Objectives() const {
  if (points.empty()) return MatrixXd(0, 0);
  MatrixXd m(size(), points[0].objectives.size());
  for (int i = 0; i < size(); ++i) m.row(i) = points[i].objectives.transpose();
  return m;
}

double FrontApproximation::InterpolateSecond(double f1) const {
  if (points.empty()) throw Error(ErrorKind::kOutOfBounds, "front is empty");
  const double lo = points.front().objectives[0];
  const double hi = points.back().objectives[0];
  const double tol = 1e-12 * std::max(1.0, std::abs(hi));
  if (f1 < lo - tol || f1 > hi + tol) {
    throw Error(ErrorKind::kOutOfBounds,
                fmt::format("f1 = {} outside the front range [{}, {}]", f1, lo, hi));
  }
  if (size() == 1 || f1 <= lo) return points.front().objectives[1];
  if (f1 >= hi) return points.back().objectives[1];
  auto it = std::upper_bound(points.begin(), points.end(), f1,
                             [](double v, const ParetoPoint& p) { return v < p.objectives[0]; });
  const ParetoPoint& b = *it;
  const ParetoPoint& a = *(it - 1);
  const double s = (f1 - a.objectives[0]) / (b.objectives[0] - a.objectives[0]);
  return a.objectives[1] + s * (b.objectives[1] - a.objectives[1]);
}

bool FrontApproximation::Certified() const {
  return std::all_of(segment_certified.begin(), segment_certified.end(),
                     [](bool b) { return b; });
}

namespace {

// Points closer than this in normalized objectives are one point at solver
// accuracy.
constexpr double kSamePointTol = 1e-4;

// Per-point supporting weights carried alongside the points while a front
// is being built.
struct PointSupport {
  VectorXd left;   // raw weights, smallest second share seen
  VectorXd right;  // raw weights, largest second share seen
  bool valid = true;
};

double SecondShare(const VectorXd& w, const Normalization& n) {
  const VectorXd v = w.cwiseProduct(n.Range());
  return v[1] / v.sum();
}

VectorXd NormalizedNormal(const VectorXd& w, const Normalization& n) {
  return w.cwiseProduct(n.Range());
}

// Gap between segment a-b and the corner of the two supporting lines.
double SegmentGap(const VectorXd& a, const VectorXd& b, const VectorXd& n1,
                  const VectorXd& n2) {
  const Eigen::Vector2d d = b - a;
  const double len = d.norm();
  if (len <= 1e-15) return 0.0;
  const Eigen::Vector2d m(-d[1] / len, d[0] / len);  // unit normal, up and right
  const double det = n1[0] * n2[1] - n1[1] * n2[0];
  if (std::abs(det) <= 1e-12 * n1.norm() * n2.norm()) {
    return std::max(0.0, std::abs(n1.dot(b - a)) / n1.norm());
  }
  const double r1 = n1.dot(a), r2 = n2.dot(b);
  const Eigen::Vector2d p((r1 * n2[1] - r2 * n1[1]) / det, (n1[0] * r2 - n2[0] * r1) / det);
  return std::max(0.0, m.dot(a - p));
}

struct Builder {
  FrontApproximation& front;
  std::vector<PointSupport> supports;

  void Add(ParetoPoint p, const VectorXd& weights, bool valid = true) {
    front.points.push_back(std::move(p));
    supports.push_back({weights, weights, valid});
  }

  // Records that `weights` attains its minimum value v at every point with
  // w . F <= v (up to tolerance).
  void AddSupport(const VectorXd& weights, double value) {
    const Normalization& n = front.normalization;
    const VectorXd nn = NormalizedNormal(weights, n);
    const double vn = value;
    const double share = SecondShare(weights, n);
    for (size_t i = 0; i < front.points.size(); ++i) {
      const double at = nn.dot(n.Apply(front.points[i].objectives));
      if (at > vn + 1e-9) continue;
      if (share < SecondShare(supports[i].left, n)) supports[i].left = weights;
      if (share > SecondShare(supports[i].right, n)) supports[i].right = weights;
    }
  }

  void Assemble() {
    const Normalization& n = front.normalization;
    std::vector<int> order(front.points.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int k) {
      const VectorXd& a = front.points[i].objectives;
      const VectorXd& b = front.points[k].objectives;
      return a[0] != b[0] ? a[0] < b[0] : a[1] < b[1];
    });
    std::vector<ParetoPoint> pts;
    std::vector<PointSupport> sup;
    for (int i : order) {
      const VectorXd fi = n.Apply(front.points[i].objectives);
      bool drop = false;
      for (size_t k = 0; k < pts.size() && !drop; ++k) {
        const VectorXd fk = n.Apply(pts[k].objectives);
        if ((fi - fk).lpNorm<Eigen::Infinity>() <= kSamePointTol) {
          // Duplicate: keep the first, merge the supports.
          if (SecondShare(supports[i].left, n) < SecondShare(sup[k].left, n)) {
            sup[k].left = supports[i].left;
          }
          if (SecondShare(supports[i].right, n) > SecondShare(sup[k].right, n)) {
            sup[k].right = supports[i].right;
          }
          sup[k].valid = sup[k].valid && supports[i].valid;
          drop = true;
        }
      }
      if (!drop) {
        pts.push_back(front.points[i]);
        sup.push_back(supports[i]);
      }
    }
    // Remove dominated points.
    std::vector<bool> keep(pts.size(), true);
    for (size_t i = 0; i < pts.size(); ++i) {
      const VectorXd fi = n.Apply(pts[i].objectives);
      for (size_t k = 0; k < pts.size(); ++k) {
        if (i == k || !keep[k]) continue;
        const VectorXd fk = n.Apply(pts[k].objectives);
        if ((fk.array() <= fi.array() + 1e-12).all() && ((fi - fk).maxCoeff() > 1e-9)) {
          keep[i] = false;
          break;
        }
      }
    }
    front.points.clear();
    supports.clear();
    for (size_t i = 0; i < pts.size(); ++i) {
      if (!keep[i]) continue;
      front.points.push_back(std::move(pts[i]));
      supports.push_back(sup[i]);
    }

    // A vertex above the chord of its neighbours contradicts convexity.
    for (size_t i = 1; i + 1 < front.points.size(); ++i) {
      const VectorXd a = n.Apply(front.points[i - 1].objectives);
      const VectorXd c = n.Apply(front.points[i].objectives);
      const VectorXd b = n.Apply(front.points[i + 1].objectives);
      const Eigen::Vector2d d = b - a;
      const Eigen::Vector2d m(-d[1], d[0]);
      if (m.dot(c - a) / d.norm() > 1e-6) supports[i].valid = false;
    }

    front.warnings.clear();
    for (size_t i = 0; i < front.points.size(); ++i) {
      if (supports[i].valid) continue;
      front.warnings.push_back(fmt::format(
          "non-convexity detected at ({:.6g}, {:.6g}); point kept, adjacent gap not certified",
          front.points[i].objectives[0], front.points[i].objectives[1]));
    }

    const size_t segs = front.points.empty() ? 0 : front.points.size() - 1;
    front.segment_gaps.assign(segs, 0.0);
    front.segment_certified.assign(segs, true);
    front.max_gap = 0.0;
    for (size_t i = 0; i < segs; ++i) {
      const VectorXd a = n.Apply(front.points[i].objectives);
      const VectorXd b = n.Apply(front.points[i + 1].objectives);
      front.segment_gaps[i] =
          SegmentGap(a, b, NormalizedNormal(supports[i].right, n),
                     NormalizedNormal(supports[i + 1].left, n));
      front.segment_certified[i] = supports[i].valid && supports[i + 1].valid;
      if (front.segment_certified[i]) {
        front.max_gap = std::max(front.max_gap, front.segment_gaps[i]);
      }
    }
    front.left_support.clear();
    front.right_support.clear();
    front.support_valid.clear();
    for (const PointSupport& ps : supports) {
      front.left_support.push_back(ps.left);
      front.right_support.push_back(ps.right);
      front.support_valid.push_back(ps.valid);
    }
  }
};

Normalization FromExtremes(const ExtremeCompromises& ext) {
  const VectorXd& a = ext.points[0].objectives;
  const VectorXd& b = ext.points[1].objectives;
  Normalization n;
  n.ideal = a.cwiseMin(b);
  n.nadir = a.cwiseMax(b);
  return n;
}

void StartFromExtremes(Builder& builder, const PointSolver& solver) {
  const ExtremeCompromises ext = ComputeExtremeCompromises(solver);
  builder.front.normalization = FromExtremes(ext);
  builder.Add(ext.points[0], VectorXd::Unit(2, 0));
  builder.Add(ext.points[1], VectorXd::Unit(2, 1));
}

}  // namespace

namespace {

Builder BuilderFor(FrontApproximation& front) {
  if (front.normalization.ideal.size() == 0 && !front.points.empty()) {
    const MatrixXd f = front.Objectives();
    front.normalization.ideal = f.colwise().minCoeff().transpose();
    front.normalization.nadir = f.colwise().maxCoeff().transpose();
  }
  Builder b{front, {}};
  const bool stored = front.left_support.size() == front.points.size() &&
                      front.right_support.size() == front.points.size() &&
                      front.support_valid.size() == front.points.size();
  for (size_t i = 0; i < front.points.size(); ++i) {
    if (stored) {
      b.supports.push_back(
          {front.left_support[i], front.right_support[i], front.support_valid[i]});
    } else {
      const VectorXd w = front.points[i].scalarization.weights;
      b.supports.push_back({w, w, true});
    }
  }
  return b;
}

// Solves along the normal of segment i and inserts the result.
bool StepOnSegment(Builder& b, int i, const PointSolver& solver) {
  FrontApproximation& front = b.front;
  const Normalization& n = front.normalization;
  if (i < 0 || i + 1 >= front.size()) return false;
  const VectorXd a = n.Apply(front.points[i].objectives);
  const VectorXd c = n.Apply(front.points[i + 1].objectives);
  VectorXd normal(2);
  normal << a[1] - c[1], c[0] - a[0];
  normal = normal.cwiseMax(0.0);
  if (!(normal.sum() > 0.0)) return false;
  normal /= normal.sum();
  const VectorXd w = n.RawWeights(normal);
  ParetoPoint p = solver(ScalarizationSpec::WeightedSum(w));
  ++front.solves;
  const double value = NormalizedNormal(w, n).dot(n.Apply(p.objectives));
  b.Add(std::move(p), w);
  b.AddSupport(w, value);
  b.Assemble();
  front.gap_history.push_back(front.max_gap);
  return true;
}

}  // namespace

void AssembleFront(FrontApproximation& front) {
  Builder b = BuilderFor(front);
  b.Assemble();
}

bool RefineSegment(FrontApproximation& front, int segment, const PointSolver& solver) {
  Builder b = BuilderFor(front);
  return StepOnSegment(b, segment, solver);
}

bool ExtendEnd(FrontApproximation& front, bool right, const PointSolver& solver) {
  const int n = front.size();
  if (n < 2) return false;
  Builder b = BuilderFor(front);
  const Normalization& norm = front.normalization;
  const VectorXd a = norm.Apply(front.points[right ? n - 2 : 0].objectives);
  const VectorXd c = norm.Apply(front.points[right ? n - 1 : 1].objectives);
  VectorXd normal(2);
  normal << a[1] - c[1], c[0] - a[0];
  normal = normal.cwiseMax(0.0);
  if (!(normal.sum() > 0.0)) return false;
  normal /= normal.sum();
  const int steep = right ? 0 : 1;
  normal[steep] /= 10.0;
  normal[1 - steep] = 1.0 - normal[steep];
  if (normal[steep] <= 1e-12) return false;
  const VectorXd w = norm.RawWeights(normal);
  ParetoPoint p = solver(ScalarizationSpec::WeightedSum(w));
  ++front.solves;
  const double value = NormalizedNormal(w, norm).dot(norm.Apply(p.objectives));
  b.Add(std::move(p), w);
  b.AddSupport(w, value);
  b.Assemble();
  front.gap_history.push_back(front.max_gap);
  return front.size() > n;
}

FrontApproximation Sandwich(const PointSolver& solver, SolveMode mode,
                            const SandwichOptions& options) {
  FrontApproximation front;
  front.mode = mode;
  Builder b{front, {}};
  StartFromExtremes(b, solver);
  b.Assemble();
  front.gap_history.push_back(front.max_gap);
  while (front.solves < options.max_solves) {
    int pick = -1;
    for (int i = 0; i < static_cast<int>(front.segment_gaps.size()); ++i) {
      if (!front.segment_certified[i]) continue;
      if (pick < 0 || front.segment_gaps[i] > front.segment_gaps[pick]) pick = i;
    }
    if (pick < 0 || front.segment_gaps[pick] <= options.eps) break;
    if (!StepOnSegment(b, pick, solver)) break;
  }
  return front;
}

std::vector<ScalarizationSpec> InteriorWeights(int count) {
  std::vector<ScalarizationSpec> out;
  for (int k = count - 2; k >= 1; --k) {
    const double w1 = static_cast<double>(k) / (count - 1);
    out.push_back(ScalarizationSpec::WeightedSum((VectorXd(2) << w1, 1.0 - w1).finished()));
  }
  return out;
}

FrontApproximation FrontFromSchedule(const PointSolver& solver, SolveMode mode,
                                     const std::vector<ScalarizationSpec>& schedule) {
  FrontApproximation front;
  front.mode = mode;
  Builder b{front, {}};
  StartFromExtremes(b, solver);
  for (const ScalarizationSpec& s : schedule) {
    ParetoPoint p = solver(s);
    ++front.solves;
    const VectorXd w = p.scalarization.weights;
    const double value =
        NormalizedNormal(w, front.normalization).dot(front.normalization.Apply(p.objectives));
    b.Add(std::move(p), w);
    b.AddSupport(w, value);
  }
  b.Assemble();
  front.gap_history.push_back(front.max_gap);
  return front;
}

DominanceReport DominanceCheck(const FrontApproximation& a, const FrontApproximation& b,
                               const Normalization& normalization) {
  if (a.points.empty() || b.points.empty()) {
    throw Error(ErrorKind::kDisjointRanges, "cannot compare an empty front");
  }
  DominanceReport r;
  r.range_lo = std::max(a.points.front().objectives[0], b.points.front().objectives[0]);
  r.range_hi = std::min(a.points.back().objectives[0], b.points.back().objectives[0]);
  if (r.range_lo > r.range_hi + 1e-12 * std::max(1.0, std::abs(r.range_hi))) {
    throw Error(ErrorKind::kDisjointRanges,
                fmt::format("objective-1 ranges do not overlap ({} > {})", r.range_lo,
                            r.range_hi));
  }
  r.range_hi = std::max(r.range_hi, r.range_lo);
  std::vector<double> at = {r.range_lo, r.range_hi};
  for (const FrontApproximation* f : {&a, &b}) {
    for (const ParetoPoint& p : f->points) {
      if (p.objectives[0] > r.range_lo && p.objectives[0] < r.range_hi) {
        at.push_back(p.objectives[0]);
      }
    }
  }
  const double scale = normalization.Range()[1];
  r.max_exceedance = -std::numeric_limits<double>::infinity();
  for (double f1 : at) {
    const double d = (a.InterpolateSecond(f1) - b.InterpolateSecond(f1)) / scale;
    if (d > r.max_exceedance) {
      r.max_exceedance = d;
      r.at_f1 = f1;
    }
  }
  return r;
}

}  // namespace maro
