#include "maro/price.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "maro/error.h"

namespace maro {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One NSR stage: min obj . F s.t. g <= 0, F_j <= caps_j and, when `budget`
// is set, w . F <= budget.
NlpResult NsrStage(const ProblemSpec& spec, const VectorXd& x, const VectorXd& u,
                   const VectorXd& obj, const VectorXd& caps, const VectorXd* w,
                   double budget, const VectorXd& start, const NlpOptions& nlp) {
  const int m = spec.num_objectives();
  const int nc = spec.num_constraints();
  std::vector<int> capped;
  for (int j = 0; j < caps.size(); ++j) {
    if (caps[j] < kInf) capped.push_back(j);
  }
  NlpProblem p;
  p.n = spec.num_wsv();
  p.m = nc + static_cast<int>(capped.size()) + (w ? 1 : 0);
  p.lower = spec.WsvLower();
  p.upper = spec.WsvUpper();
  p.start = start.cwiseMax(p.lower).cwiseMin(p.upper);
  p.evaluate = [&, capped, m, nc](const VectorXd& y, double& f, VectorXd& c, VectorXd* g,
                                  MatrixXd* jac) {
    ModelJacobians mj;
    if (g || jac) {
      EvaluateWithJacobians(spec, x, y, u, mj);
    } else {
      mj.objectives.resize(m);
      mj.constraints.resize(nc);
      spec.model().Evaluate(x, y, u, mj.objectives, mj.constraints);
    }
    f = obj.dot(mj.objectives);
    c.resize(p.m);
    c.head(nc) = mj.constraints;
    for (size_t i = 0; i < capped.size(); ++i) {
      c[nc + i] = mj.objectives[capped[i]] - caps[capped[i]];
    }
    if (w) c[p.m - 1] = w->dot(mj.objectives) - budget;
    if (g) *g = mj.objectives_y.transpose() * obj;
    if (jac) {
      jac->resize(p.m, p.n);
      jac->topRows(nc) = mj.constraints_y;
      for (size_t i = 0; i < capped.size(); ++i) {
        jac->row(nc + i) = mj.objectives_y.row(capped[i]);
      }
      if (w) jac->row(p.m - 1) = (mj.objectives_y.transpose() * *w).transpose();
    }
  };
  return Solve(p, nlp);
}

}  // namespace

NsrResult SolveNsr(const ProblemSpec& spec, const VectorXd& x,
                   const ScalarizationSpec& preference, const NsrOptions& options) {
  const ScalarizationSpec pref = preference.Normalized(spec.num_objectives());
  const VectorXd u = spec.uncertainty().Nominal();
  const int m = spec.num_objectives();
  const VectorXd caps = options.caps.size() == m ? options.caps : VectorXd::Constant(m, kInf);
  NsrResult out;
  auto finish = [&](const VectorXd& y) {
    const Evaluation e = Evaluate(spec, x, y, u);
    double worst = e.constraints.size() ? e.constraints.maxCoeff() : 0.0;
    for (int j = 0; j < m; ++j) worst = std::max(worst, e.objectives[j] - caps[j]);
    if (worst > options.feas_tol) {
      throw Error(ErrorKind::kNsrInfeasible,
                  fmt::format("no feasible wait-and-see response at the nominal scenario "
                              "(violation {:.3g})",
                              worst));
    }
    out.y = y;
    out.objectives = e.objectives;
    out.constraints = e.constraints;
  };
  if (spec.num_wsv() == 0) {
    finish(VectorXd(0));
    return out;
  }
  const VectorXd start = options.start.size() == spec.num_wsv() ? options.start
                                                                 : spec.WsvInitial();
  const NlpResult first = NsrStage(spec, x, u, pref.weights, caps, nullptr, 0.0, start,
                                   options.nlp);
  if (!first.feasible(options.feas_tol)) finish(first.x);  // throws
  VectorXd y = first.x;
  VectorXd zero_weight = VectorXd::Zero(m);
  for (int j = 0; j < m; ++j) zero_weight[j] = pref.weights[j] == 0.0 ? 1.0 : 0.0;
  if (zero_weight.sum() > 0.0) {
    const double budget = first.f + 1e-9 * std::max(1.0, std::abs(first.f));
    const NlpResult second =
        NsrStage(spec, x, u, zero_weight, caps, &pref.weights, budget, y, options.nlp);
    if (second.feasible(options.feas_tol)) y = second.x;
  }
  finish(y);
  return out;
}

ScalarizationSpec DefaultPreference(const ParetoPoint& point) {
  const ScalarizationSpec& sc = point.scalarization;
  ScalarizationSpec pref;
  pref.weights = VectorXd::Zero(sc.weights.size());
  for (int j = 0; j < sc.caps.size(); ++j) {
    if (std::isfinite(sc.caps[j])) pref.weights[j] = 1.0;
  }
  if (pref.weights.sum() == 0.0) pref.weights = sc.weights;
  return pref;
}

namespace {

struct Hit {
  double alpha;
  int segment;
  double s;
};

// All intersections of o + alpha d (alpha unrestricted) with the polyline.
std::vector<Hit> LineHits(const VectorXd& o, const VectorXd& d, const FrontApproximation& f) {
  std::vector<Hit> hits;
  const double dd = d.squaredNorm();
  auto cross = [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return a[0] * b[1] - a[1] * b[0];
  };
  const Eigen::Vector2d dir = d;
  if (f.size() == 1) {
    const Eigen::Vector2d r = f.points[0].objectives - o;
    if (std::abs(cross(dir, r)) <= 1e-12 * std::max(1.0, r.norm() * dir.norm())) {
      hits.push_back({dir.dot(r) / dd, 0, 0.0});
    }
    return hits;
  }
  for (int i = 0; i + 1 < f.size(); ++i) {
    const Eigen::Vector2d a = f.points[i].objectives;
    const Eigen::Vector2d b = f.points[i + 1].objectives;
    const Eigen::Vector2d e = b - a;
    const Eigen::Vector2d r = a - Eigen::Vector2d(o);
    const double den = cross(dir, e);
    const double scale = dir.norm() * e.norm();
    if (std::abs(den) <= 1e-14 * scale) {
      if (std::abs(cross(dir, r)) <= 1e-12 * std::max(1.0, dir.norm() * r.norm())) {
        hits.push_back({dir.dot(r) / dd, i, 0.0});
        hits.push_back({dir.dot(b - Eigen::Vector2d(o)) / dd, i, 1.0});
      }
      continue;
    }
    const double alpha = cross(r, e) / den;
    const double s = cross(r, dir) / den;
    if (s >= -1e-12 && s <= 1.0 + 1e-12) hits.push_back({alpha, i, std::clamp(s, 0.0, 1.0)});
  }
  return hits;
}

void Fill(RayIntersection& out, const FrontApproximation& f, const Hit& h) {
  out.segment = h.segment;
  if (f.size() == 1) {
    out.point = f.points[0].objectives;
    out.lambda = {{0, 1.0}};
    return;
  }
  const VectorXd& a = f.points[h.segment].objectives;
  const VectorXd& b = f.points[h.segment + 1].objectives;
  out.point = (1.0 - h.s) * a + h.s * b;
  out.lambda = {{h.segment, 1.0 - h.s}, {h.segment + 1, h.s}};
}

}  // namespace

RayIntersection IntersectFront(const VectorXd& origin, const VectorXd& d,
                               const FrontApproximation& front) {
  if (front.points.empty()) {
    throw Error(ErrorKind::kInvalidSpec, "nominal front is empty");
  }
  if (origin.size() != 2 || d.size() != 2 || !d.allFinite()) {
    throw Error(ErrorKind::kDimensionMismatch, "ray needs finite two-dimensional data");
  }
  RayIntersection out;
  if (d.lpNorm<Eigen::Infinity>() <= 1e-9) {
    out.d_zero = true;
    const VectorXd diag = -front.normalization.Range();
    const std::vector<Hit> hits = LineHits(origin, diag, front);
    if (!hits.empty()) {
      const Hit* best = &hits[0];
      for (const Hit& h : hits) {
        if (std::abs(h.alpha) < std::abs(best->alpha)) best = &h;
      }
      Fill(out, front, *best);
      out.alpha = 0.0;
      return out;
    }
  } else {
    const std::vector<Hit> hits = LineHits(origin, d, front);
    const Hit* best = nullptr;
    for (const Hit& h : hits) {
      if (h.alpha >= -1e-12 && (!best || h.alpha > best->alpha)) best = &h;
    }
    if (best) {
      out.alpha = std::max(0.0, best->alpha);
      Fill(out, front, *best);
      return out;
    }
  }
  // Miss: clamp to the endpoint nearest to the ray (or to the origin).
  out.ray_misses_front = true;
  const VectorXd dir = out.d_zero ? VectorXd(-front.normalization.Range()) : d;
  int best_end = 0;
  double best_dist = kInf;
  for (int end : {0, front.size() - 1}) {
    const VectorXd r = front.points[end].objectives - origin;
    const double t = std::max(0.0, r.dot(dir) / dir.squaredNorm());
    const double dist = (r - t * dir).norm();
    if (dist < best_dist) {
      best_dist = dist;
      best_end = end;
    }
  }
  out.point = front.points[best_end].objectives;
  out.segment = std::min(best_end, std::max(0, front.size() - 2));
  out.lambda = {{best_end, 1.0}};
  if (!out.d_zero) out.alpha = (out.point - origin).dot(d) / d.squaredNorm();
  return out;
}

PriceReport PriceFromNsr(const ParetoPoint& robust_point, const ScalarizationSpec& preference,
                         const NsrResult& nsr, const FrontApproximation& nominal_front) {
  PriceReport r;
  r.x_star = robust_point.solution.x;
  r.preference = preference;
  r.f_maro = robust_point.objectives;
  r.f_nsr = nsr.objectives;
  r.y_nsr = nsr.y;
  r.d = r.f_nsr - r.f_maro;
  const RayIntersection hit = IntersectFront(r.f_maro, r.d, nominal_front);
  r.alpha_star = hit.alpha;
  r.f_mo = hit.point;
  r.segment = hit.segment;
  r.lambda = hit.lambda;
  r.d_zero = hit.d_zero;
  r.ray_misses_front = hit.ray_misses_front;
  r.p_r = r.d_zero ? VectorXd(VectorXd::Zero(r.f_nsr.size())) : VectorXd(r.f_nsr - r.f_mo);
  return r;
}

PriceReport Price(const ProblemSpec& spec, const ParetoPoint& robust_point,
                  const FrontApproximation& nominal_front,
                  const ScalarizationSpec* preference, const NsrOptions& options) {
  const ScalarizationSpec pref =
      (preference ? *preference : DefaultPreference(robust_point)).Normalized(spec.num_objectives());
  NsrOptions opts = options;
  if (opts.caps.size() == 0) opts.caps = robust_point.objectives;
  const NsrResult nsr = SolveNsr(spec, robust_point.solution.x, pref, opts);
  return PriceFromNsr(robust_point, pref, nsr, nominal_front);
}

std::vector<PriceReport> PriceFront(const ProblemSpec& spec,
                                    const FrontApproximation& robust_front,
                                    FrontApproximation& nominal_front,
                                    const PointSolver& nominal_solver,
                                    const PriceFrontOptions& options) {
  std::vector<NsrResult> nsr;
  std::vector<ScalarizationSpec> prefs;
  for (const ParetoPoint& p : robust_front.points) {
    prefs.push_back(DefaultPreference(p).Normalized(spec.num_objectives()));
    NsrOptions opts = options.nsr;
    if (opts.caps.size() == 0) opts.caps = p.objectives;
    nsr.push_back(SolveNsr(spec, p.solution.x, prefs.back(), opts));
  }
  if (options.refine) {
    for (size_t i = 0; i < robust_front.points.size(); ++i) {
      const VectorXd d = nsr[i].objectives - robust_front.points[i].objectives;
      for (int step = 0; step < options.max_refine_solves; ++step) {
        const RayIntersection hit =
            IntersectFront(robust_front.points[i].objectives, d, nominal_front);
        if (nominal_front.size() < 2) break;
        if (hit.ray_misses_front) {
          // The ray passes beyond an end of the approximation.
          const bool right = hit.lambda[0].first == nominal_front.size() - 1;
          if (!ExtendEnd(nominal_front, right, nominal_solver)) break;
          continue;
        }
        if (nominal_front.segment_gaps[hit.segment] <= options.refine_gap) break;
        if (!nominal_front.segment_certified[hit.segment]) break;
        const int before = nominal_front.size();
        if (!RefineSegment(nominal_front, hit.segment, nominal_solver)) break;
        if (nominal_front.size() == before &&
            nominal_front.segment_gaps[std::min(hit.segment, nominal_front.size() - 2)] >
                options.refine_gap) {
          break;
        }
      }
    }
  }
  std::vector<PriceReport> out;
  for (size_t i = 0; i < robust_front.points.size(); ++i) {
    out.push_back(PriceFromNsr(robust_front.points[i], prefs[i], nsr[i], nominal_front));
  }
  return out;
}

}  // namespace maro
