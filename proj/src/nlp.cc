#include "maro/nlp.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "maro/error.h"

namespace maro {

const char* NlpStatusName(NlpStatus status) {
  switch (status) {
    case NlpStatus::kOptimal: return "optimal";
    case NlpStatus::kFeasibleSuboptimal: return "feasible_suboptimal";
    case NlpStatus::kInfeasible: return "infeasible";
    case NlpStatus::kIterationLimit: return "iteration_limit";
  }
  return "unknown";
}

namespace {

// The solver works in s = (z - lower) / scale.
class ScaledProblem {
 public:
  explicit ScaledProblem(const NlpProblem& p) : p_(p) {
    if (p.lower.size() != p.n || p.upper.size() != p.n) {
      throw Error(ErrorKind::kDimensionMismatch, "NLP bounds have wrong size");
    }
    scale_ = p.scale.size() == p.n ? p.scale : VectorXd(p.upper - p.lower);
    for (int i = 0; i < p.n; ++i) {
      if (!std::isfinite(p.lower[i]) || !std::isfinite(p.upper[i]) ||
          p.lower[i] > p.upper[i]) {
        throw Error(ErrorKind::kInvalidSpec, "NLP bounds must be finite and ordered");
      }
      if (!(scale_[i] > 0.0)) scale_[i] = 1.0;
    }
    hi_ = (p.upper - p.lower).cwiseQuotient(scale_);
  }

  int n() const { return p_.n; }
  int m() const { return p_.m; }
  const VectorXd& hi() const { return hi_; }

  VectorXd ToZ(const VectorXd& s) const {
    VectorXd z = p_.lower + scale_.cwiseProduct(s);
    return z.cwiseMax(p_.lower).cwiseMin(p_.upper);
  }
  VectorXd ToS(const VectorXd& z) const {
    VectorXd s = (z - p_.lower).cwiseQuotient(scale_);
    return Project(s);
  }
  VectorXd Project(const VectorXd& s) const {
    return s.cwiseMax(0.0).cwiseMin(hi_);
  }

  // Returns false for non-finite model output (already replaced by penalty
  // values).
  bool Eval(const VectorXd& s, double& f, VectorXd& c, VectorXd* g,
            MatrixXd* jac) const {
    const VectorXd z = ToZ(s);
    c.resize(p_.m);
    VectorXd gz;
    MatrixXd jz;
    bool ok = true;
    try {
      p_.evaluate(z, f, c, g ? &gz : nullptr, jac ? &jz : nullptr);
      ok = std::isfinite(f) && c.allFinite() && (!g || gz.allFinite()) &&
           (!jac || jz.allFinite());
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kNonFiniteEvaluation) throw;
      ok = false;
    }
    if (!ok) {
      f = kNonFinitePenalty;
      c.setConstant(p_.m, kNonFinitePenalty);
      if (g) g->setZero(p_.n);
      if (jac) jac->setZero(p_.m, p_.n);
      return false;
    }
    if (g) *g = gz.cwiseProduct(scale_);
    if (jac) *jac = jz * scale_.asDiagonal();
    return true;
  }

 private:
  const NlpProblem& p_;
  VectorXd scale_;
  VectorXd hi_;
};

double MaxViolation(const VectorXd& c) {
  return c.size() == 0 ? 0.0 : std::max(0.0, c.maxCoeff());
}

struct AugmentedLagrangian {
  const ScaledProblem& sp;
  const VectorXd& mu;
  double rho;

  // Value of the PHR augmented Lagrangian; gradient optional. Also returns
  // the objective gradient norm used to make tolerances relative.
  double operator()(const VectorXd& s, VectorXd* grad, double* fgrad_norm) const {
    double f;
    VectorXd c, g;
    MatrixXd jac;
    sp.Eval(s, f, c, grad ? &g : nullptr, grad ? &jac : nullptr);
    double value = f;
    VectorXd shifted(c.size());
    for (int i = 0; i < c.size(); ++i) {
      shifted[i] = std::max(0.0, mu[i] + rho * c[i]);
      value += (shifted[i] * shifted[i] - mu[i] * mu[i]) / (2.0 * rho);
    }
    if (grad) {
      if (fgrad_norm) *fgrad_norm = g.size() ? g.lpNorm<Eigen::Infinity>() : 0.0;
      *grad = g;
      if (c.size()) *grad += jac.transpose() * shifted;
    }
    return value;
  }
};

double ProjectedGradientNorm(const ScaledProblem& sp, const VectorXd& s,
                             const VectorXd& g) {
  return (sp.Project(s - g) - s).lpNorm<Eigen::Infinity>();
}

struct InnerResult {
  VectorXd s;
  double stationarity = 0.0;  // relative projected gradient norm
  int iterations = 0;
};

// Projected quasi-Newton (BFGS on the free variables) for a smooth function
// on the scaled box.
InnerResult MinimizeBox(const ScaledProblem& sp, const AugmentedLagrangian& al,
                        VectorXd s, double tol, int max_iter) {
  const int n = sp.n();
  InnerResult out;
  VectorXd g;
  double fgrad = 0.0;
  double phi = al(s, &g, &fgrad);
  MatrixXd h = MatrixXd::Identity(n, n);
  bool fresh = true;
  int stalls = 0;
  int it = 0;
  for (; it < max_iter; ++it) {
    const double pg = ProjectedGradientNorm(sp, s, g);
    if (pg <= tol * std::max(1.0, fgrad)) break;

    const double eps = 1e-12;
    std::vector<bool> active(n, false);
    VectorXd gf = g;
    for (int i = 0; i < n; ++i) {
      if ((s[i] <= eps && g[i] > 0.0) || (s[i] >= sp.hi()[i] - eps && g[i] < 0.0)) {
        active[i] = true;
        gf[i] = 0.0;
      }
    }
    VectorXd d = -(h * gf);
    for (int i = 0; i < n; ++i) {
      if (active[i]) d[i] = 0.0;
    }
    if (gf.dot(d) >= 0.0) {
      h.setIdentity();
      fresh = true;
      d = -gf;
    }

    bool accepted = false;
    VectorXd s_new, g_new;
    double phi_new = phi, fgrad_new = fgrad;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      double alpha = 1.0;
      const double dmax = d.lpNorm<Eigen::Infinity>();
      if (dmax > 10.0) alpha = 10.0 / dmax;
      for (int ls = 0; ls < 60; ++ls) {
        s_new = sp.Project(s + alpha * d);
        const VectorXd step = s_new - s;
        const double decrease = g.dot(step);
        phi_new = al(s_new, nullptr, nullptr);
        if (step.lpNorm<Eigen::Infinity>() == 0.0) break;
        if (phi_new <= phi + 1e-4 * decrease && decrease < 0.0) {
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) {
        if (fresh) break;
        h.setIdentity();
        fresh = true;
        d = -gf;
      }
    }
    if (!accepted) break;

    al(s_new, &g_new, &fgrad_new);
    const VectorXd sk = s_new - s;
    const VectorXd yk = g_new - g;
    const double sy = sk.dot(yk);
    if (sy > 1e-12 * sk.norm() * yk.norm() && sy > 0.0) {
      if (fresh) {
        h *= sy / yk.squaredNorm();
        fresh = false;
      }
      const double r = 1.0 / sy;
      const VectorXd hy = h * yk;
      h += (r * r * (sy + yk.dot(hy))) * (sk * sk.transpose()) -
           r * (hy * sk.transpose() + sk * hy.transpose());
    }
    const double change = std::abs(phi - phi_new);
    stalls = change <= 1e-16 * std::max(1.0, std::abs(phi)) ? stalls + 1 : 0;
    s = s_new;
    g = g_new;
    phi = phi_new;
    fgrad = fgrad_new;
    if (stalls >= 5) break;
  }
  out.s = s;
  out.iterations = it;
  out.stationarity = ProjectedGradientNorm(sp, s, g) / std::max(1.0, fgrad);
  return out;
}

// Gauss-Newton corrections s -= J^T (J J^T)^-1 c on the violated
// constraints, with backtracking on the maximum violation. Cleans up the
// small residual violation the augmented Lagrangian leaves on constraints
// with weak gradients.
VectorXd RestoreFeasibility(const ScaledProblem& sp, VectorXd s, double target) {
  double f;
  VectorXd c;
  MatrixXd jac;
  sp.Eval(s, f, c, nullptr, &jac);
  double viol = MaxViolation(c);
  for (int it = 0; it < 30 && viol > target; ++it) {
    std::vector<int> rows;
    for (int i = 0; i < c.size(); ++i) {
      if (c[i] > 0.0) rows.push_back(i);
    }
    MatrixXd jv(rows.size(), sp.n());
    VectorXd cv(rows.size());
    for (size_t r = 0; r < rows.size(); ++r) {
      jv.row(r) = jac.row(rows[r]);
      cv[r] = c[rows[r]];
    }
    // Variables on a bound that the step would push outward are frozen and
    // the step is recomputed over the rest.
    VectorXd step;
    std::vector<bool> frozen(sp.n(), false);
    for (int pass = 0; pass <= sp.n(); ++pass) {
      MatrixXd jf = jv;
      for (int k = 0; k < sp.n(); ++k) {
        if (frozen[k]) jf.col(k).setZero();
      }
      MatrixXd gram = jf * jf.transpose();
      gram.diagonal().array() += 1e-14 * std::max(1.0, gram.trace());
      step = -jf.transpose() * gram.ldlt().solve(cv);
      bool changed = false;
      for (int k = 0; k < sp.n(); ++k) {
        const bool outward = (s[k] <= 0.0 && step[k] < 0.0) || (s[k] >= sp.hi()[k] && step[k] > 0.0);
        if (!frozen[k] && outward) frozen[k] = changed = true;
      }
      if (!changed) break;
    }
    if (!step.allFinite()) break;
    bool improved = false;
    for (double alpha = 1.0; alpha > 1e-6; alpha *= 0.5) {
      const VectorXd trial = sp.Project(s + alpha * step);
      VectorXd ct;
      MatrixXd jt;
      if (!sp.Eval(trial, f, ct, nullptr, &jt)) continue;
      const double vt = MaxViolation(ct);
      if (vt < viol) {
        s = trial;
        c = ct;
        jac = jt;
        viol = vt;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  return s;
}

NlpResult SolveFrom(const ScaledProblem& sp, const VectorXd& s0,
                    const NlpOptions& opt, int start_index) {
  NlpResult res;
  res.start_index = start_index;
  VectorXd s = sp.Project(s0);
  VectorXd mu = VectorXd::Zero(sp.m());
  double rho = opt.penalty_init;
  double f;
  VectorXd c;
  sp.Eval(s, f, c, nullptr, nullptr);
  double viol = MaxViolation(c);
  double stationarity = std::numeric_limits<double>::infinity();
  bool converged = false;
  int stagnant = 0;
  int outer = 0;
  for (; outer < opt.max_outer; ++outer) {
    const AugmentedLagrangian al{sp, mu, rho};
    const InnerResult inner = MinimizeBox(sp, al, s, 0.1 * opt.opt_tol, opt.max_inner);
    double f_new;
    VectorXd c_new;
    sp.Eval(inner.s, f_new, c_new, nullptr, nullptr);
    const double viol_new = MaxViolation(c_new);

    // Accepted outer iterates never increase the violation beyond the
    // tolerance; otherwise retry from the previous point with more penalty.
    if (outer > 0 && viol_new > std::max(viol, opt.feas_tol) &&
        rho < opt.penalty_max) {
      rho = std::min(rho * opt.penalty_growth, opt.penalty_max);
      continue;
    }
    s = inner.s;
    f = f_new;
    c = c_new;
    stationarity = inner.stationarity;
    VectorXd mu_new(sp.m());
    double complementarity = 0.0;
    for (int i = 0; i < sp.m(); ++i) {
      mu_new[i] = std::max(0.0, mu[i] + rho * c[i]);
      complementarity = std::max(complementarity, std::min(mu_new[i], std::abs(c[i])));
    }
    if (opt.on_iteration) {
      opt.on_iteration({start_index, outer, f, viol_new, rho});
    }
    res.violation_history.push_back(viol_new);
    const double previous = viol;
    viol = viol_new;
    mu = mu_new;
    if (viol <= opt.feas_tol && complementarity <= opt.feas_tol &&
        stationarity <= opt.opt_tol) {
      converged = true;
      ++outer;
      break;
    }
    if (viol > opt.feas_tol && viol > 0.5 * previous) {
      if (rho >= opt.penalty_max) {
        if (++stagnant >= 5) {
          ++outer;
          break;
        }
      }
      rho = std::min(rho * opt.penalty_growth, opt.penalty_max);
    } else {
      stagnant = 0;
    }
  }
  if (viol > opt.target_violation && viol <= opt.feas_tol) {
    const double before = viol;
    s = RestoreFeasibility(sp, s, opt.target_violation);
    sp.Eval(s, f, c, nullptr, nullptr);
    viol = MaxViolation(c);
    if (viol <= opt.target_violation && stationarity <= opt.opt_tol) converged = true;
    if (viol < before) res.violation_history.push_back(viol);
  }
  res.x = sp.ToZ(s);
  res.f = f;
  res.max_violation = viol;
  res.multipliers = mu;
  res.stationarity = stationarity;
  res.iterations = outer;
  if (converged) {
    res.status = NlpStatus::kOptimal;
  } else if (viol > opt.feas_tol) {
    res.status = outer >= opt.max_outer ? NlpStatus::kIterationLimit
                                        : NlpStatus::kInfeasible;
  } else {
    res.status = outer >= opt.max_outer ? NlpStatus::kIterationLimit
                                        : NlpStatus::kFeasibleSuboptimal;
  }
  return res;
}

std::vector<VectorXd> LatinHypercube(const VectorXd& hi, int count,
                                     std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = static_cast<int>(hi.size());
  std::vector<VectorXd> points(count, VectorXd(n));
  std::vector<int> strata(count);
  for (int d = 0; d < n; ++d) {
    std::iota(strata.begin(), strata.end(), 0);
    // Fisher-Yates with our own draws keeps the sequence identical across
    // standard library implementations.
    for (int i = count - 1; i > 0; --i) {
      const int j = static_cast<int>(unit(rng) * (i + 1)) % (i + 1);
      std::swap(strata[i], strata[j]);
    }
    for (int k = 0; k < count; ++k) {
      points[k][d] = hi[d] * (strata[k] + unit(rng)) / count;
    }
  }
  return points;
}

bool Better(const NlpResult& a, const NlpResult& b, double feas_tol) {
  const bool fa = a.max_violation <= feas_tol;
  const bool fb = b.max_violation <= feas_tol;
  if (fa != fb) return fa;
  if (fa) return a.f < b.f - 1e-12 * std::max(1.0, std::abs(b.f));
  return a.max_violation < b.max_violation;
}

}  // namespace

NlpResult Solve(const NlpProblem& problem, const NlpOptions& options) {
  if (problem.n <= 0) {
    throw Error(ErrorKind::kDimensionMismatch, "NLP has no decision variables");
  }
  const ScaledProblem sp(problem);
  std::vector<VectorXd> starts;
  starts.push_back(problem.start.size() == problem.n
                       ? sp.ToS(problem.start)
                       : VectorXd(0.5 * sp.hi()));
  if (options.multistart > 1) {
    for (VectorXd& s : LatinHypercube(sp.hi(), options.multistart - 1, options.seed)) {
      if (problem.complete_start) {
        VectorXd z = sp.ToZ(s);
        problem.complete_start(z);
        s = sp.ToS(z);
      }
      starts.push_back(std::move(s));
    }
  }
  NlpResult best;
  bool have = false;
  int total_iterations = 0;
  for (int k = 0; k < static_cast<int>(starts.size()); ++k) {
    NlpResult r = SolveFrom(sp, starts[k], options, k);
    total_iterations += r.iterations;
    if (!have || Better(r, best, options.feas_tol)) {
      best = std::move(r);
      have = true;
    }
  }
  best.iterations = total_iterations;
  return best;
}

}  // namespace maro
