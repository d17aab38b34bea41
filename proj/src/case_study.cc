#include "maro/case_study.h"

#include <array>
#include <cmath>
#include <memory>

namespace maro {
namespace {

class Sp1Model final : public Model {
 public:
  void Evaluate(const VectorXd& x, const VectorXd& y, const VectorXd& u,
                VectorXd& f, VectorXd& g) const override {
    const double a = x[0], b = y[0], s = u[0];
    f[0] = a * a + b + 0.2 * s * (1.0 - b);
    f[1] = (1.0 - a) * (1.0 - a) + 0.5 * (1.0 - b) + 0.2 * s * b;
    g[0] = s * (0.5 - b) - 0.3;
  }

  bool HasGradients() const override { return true; }

  void Jacobians(const VectorXd& x, const VectorXd& y, const VectorXd& u,
                 ModelJacobians& out) const override {
    Evaluate(x, y, u, out.objectives, out.constraints);
    const double a = x[0], s = u[0];
    out.objectives_x << 2.0 * a, -2.0 * (1.0 - a);
    out.objectives_y << 1.0 - 0.2 * s, -0.5 + 0.2 * s;
    out.constraints_x << 0.0;
    out.constraints_y << -s;
  }
};

class Sp2Model final : public Model {
 public:
  void Evaluate(const VectorXd& x, const VectorXd& y, const VectorXd& u,
                VectorXd& f, VectorXd& g) const override {
    const double a = x[0], b = y[0], s = u[0], t = u[1];
    f[0] = a * a + b + 0.2 * s * (1.0 - b);
    f[1] = (1.0 - a) * (1.0 - a) + 0.5 * (1.0 - b) + 0.2 * s * b;
    g[0] = s * (0.5 - b) - 0.3;
    g[1] = a + b + 0.3 * (s + t) - 1.6;
  }

  bool HasGradients() const override { return true; }

  void Jacobians(const VectorXd& x, const VectorXd& y, const VectorXd& u,
                 ModelJacobians& out) const override {
    Evaluate(x, y, u, out.objectives, out.constraints);
    const double a = x[0], s = u[0];
    out.objectives_x << 2.0 * a, -2.0 * (1.0 - a);
    out.objectives_y << 1.0 - 0.2 * s, -0.5 + 0.2 * s;
    out.constraints_x << 0.0, 1.0;
    out.constraints_y << -s, 1.0;
  }
};

// Forward-mode value/derivative pair over the seven column decisions.
constexpr int kColumnVars = 7;

struct Jet {
  double v = 0.0;
  std::array<double, kColumnVars> d{};

  Jet() = default;
  Jet(double value) : v(value) {}  // NOLINT: constants promote implicitly

  static Jet Seed(double value, int i) {
    Jet j(value);
    j.d[i] = 1.0;
    return j;
  }
};

Jet operator+(const Jet& a, const Jet& b) {
  Jet r(a.v + b.v);
  for (int i = 0; i < kColumnVars; ++i) r.d[i] = a.d[i] + b.d[i];
  return r;
}
Jet operator-(const Jet& a, const Jet& b) {
  Jet r(a.v - b.v);
  for (int i = 0; i < kColumnVars; ++i) r.d[i] = a.d[i] - b.d[i];
  return r;
}
Jet operator*(const Jet& a, const Jet& b) {
  Jet r(a.v * b.v);
  for (int i = 0; i < kColumnVars; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
  return r;
}
Jet operator/(const Jet& a, const Jet& b) {
  Jet r(a.v / b.v);
  for (int i = 0; i < kColumnVars; ++i) {
    r.d[i] = (a.d[i] * b.v - a.v * b.d[i]) / (b.v * b.v);
  }
  return r;
}
Jet Chain(const Jet& a, double value, double slope) {
  Jet r(value);
  for (int i = 0; i < kColumnVars; ++i) r.d[i] = slope * a.d[i];
  return r;
}
Jet exp(const Jet& a) {
  const double e = std::exp(a.v);
  return Chain(a, e, e);
}
Jet log1p(const Jet& a) { return Chain(a, std::log1p(a.v), 1.0 / (1.0 + a.v)); }
Jet pow(const Jet& a, double e) {
  return Chain(a, std::pow(a.v, e), e * std::pow(a.v, e - 1.0));
}
// max(0, a)^2, continuously differentiable.
template <typename T>
T PositiveSquare(const T& a) {
  if (a.v > 0.0) return a * a;
  return T(0.0);
}
template <>
double PositiveSquare(const double& a) {
  return a > 0.0 ? a * a : 0.0;
}

using std::exp;
using std::log1p;
using std::pow;

// Scale parameters of the column surrogate. Every constraint is written as
// (required / available) - 1 so that values are O(1) on the design box.
constexpr double kFeedRate = 8000.0;       // kg/h at unit load
constexpr double kLatentMf = 0.13;         // kWh/kg distillate vapour
constexpr double kSensibleHeat = 0.02;     // kWh/kg feed
constexpr double kReboilerFlux = 9.0;      // kW/m^2
constexpr double kCondenserFlux = 8.0;     // kW/m^2
constexpr double kFFactorCap = 1.2;        // vapour load per D^2
constexpr double kTopRequirement = 0.81;
constexpr double kBottomRequirement = 0.30;
constexpr double kTopNorm = 0.33;          // R/(R+1) per unit top requirement
constexpr double kStageScale = 40.0;       // total stages at which reflux need levels off
constexpr double kStripScale = 60.0;
constexpr double kExcessPenalty = 200.0;
constexpr double kCapexScale = 1.2;
constexpr double kOpexScale = 0.21;

// Outputs in order: objectives (CAPEX, OPEX), constraints (top purity,
// bottom purity, Q_r max, Q_c max, F-factor max, energy balance, feed stage
// placement).
//
// Derivation notes.
//  * Top purity: the reflux needed falls with the rectifying stages above the
//    feed and, Gilliland style, with the total stage count.
//  * Thermodynamic factors: higher F12 and w_MF make the top split harder and
//    the bottom split easier (two-phase region shrinks at high MF fractions and
//    widens at low ones). The top effect is the stronger one, so the corner
//    with maximal F12 and w_MF is the most expensive one to operate.
//  * Reboiler duty beyond the energy balance sends more methanol overhead and
//    spoils the top product. With per-scenario operation the duty follows the
//    balance exactly; a single operating point for all feeds cannot, which is
//    what separates fixed from adjustable operation.
//  * Duties and vapour load scale with the throughput l, so the heavy corner
//    stresses Q_r^max, Q_c^max and F^max. OPEX is per ton and ignores l.
//  * CAPEX: shell cost in N and D dominates; exchanger areas follow the
//    six-tenths rule.
template <typename T>
void ColumnEquations(const T& stages, const T& feed, const T& diameter,
                     const T& area_r, const T& area_c, const T& reflux,
                     const T& duty, double f12, double w_mf, double load,
                     T* f, T* g) {
  const double top_difficulty = std::exp(0.8 * (f12 - 1.0) + 2.0 * (w_mf - 0.8));
  const double bottom_difficulty = std::exp(-0.3 * (f12 - 1.0) - 0.5 * (w_mf - 0.8));

  const T rect_eff = T(1.0) - exp(T(0.0) - feed / T(3.0));
  const T stage_eff = T(1.0) - exp(T(0.0) - stages / T(kStageScale));
  const T strip_stages = T(2.0) * log1p(exp((stages - feed) / T(2.0)));
  const T strip_eff = T(1.0) - exp(T(0.0) - strip_stages / T(kStripScale));

  const T vapour = (reflux + T(1.0)) * T(w_mf);  // kg vapour per kg feed
  const T condenser_specific = T(kLatentMf) * vapour;
  const T balance = condenser_specific + T(kSensibleHeat);
  const T excess = PositiveSquare(duty / balance - T(1.0));

  const T top_capacity = rect_eff * stage_eff * reflux / (reflux + T(1.0)) /
                         T(kTopNorm) / (T(1.0) + T(kExcessPenalty) * excess);
  const T bottom_capacity = strip_eff * duty / T(0.2);

  f[0] = (T(0.012) * stages * diameter + T(0.1) * diameter * diameter +
          T(0.004) * (pow(area_r, 0.6) + pow(area_c, 0.6))) /
         T(kCapexScale);
  f[1] = (duty + T(0.1) * condenser_specific) / T(kOpexScale);

  g[0] = T(kTopRequirement * top_difficulty) / top_capacity - T(1.0);
  g[1] = T(kBottomRequirement * bottom_difficulty) / bottom_capacity - T(1.0);
  g[2] = duty * T(kFeedRate * load) / (T(kReboilerFlux) * area_r) - T(1.0);
  g[3] = condenser_specific * T(kFeedRate * load) / (T(kCondenserFlux) * area_c) -
         T(1.0);
  g[4] = vapour * T(load) / (T(kFFactorCap) * diameter * diameter) - T(1.0);
  g[5] = balance / duty - T(1.0);
  g[6] = (feed + T(2.0) - stages) / T(10.0);
}

class ColumnModel final : public Model {
 public:
  void Evaluate(const VectorXd& x, const VectorXd& y, const VectorXd& u,
                VectorXd& f, VectorXd& g) const override {
    double fo[2], go[7];
    ColumnEquations<double>(x[0], x[1], x[2], x[3], x[4], y[0], y[1], u[0], u[1],
                            u[2], fo, go);
    for (int i = 0; i < 2; ++i) f[i] = fo[i];
    for (int i = 0; i < 7; ++i) g[i] = go[i];
  }

  bool HasGradients() const override { return true; }

  void Jacobians(const VectorXd& x, const VectorXd& y, const VectorXd& u,
                 ModelJacobians& out) const override {
    Jet fo[2], go[7];
    ColumnEquations<Jet>(Jet::Seed(x[0], 0), Jet::Seed(x[1], 1),
                         Jet::Seed(x[2], 2), Jet::Seed(x[3], 3),
                         Jet::Seed(x[4], 4), Jet::Seed(y[0], 5),
                         Jet::Seed(y[1], 6), u[0], u[1], u[2], fo, go);
    for (int i = 0; i < 2; ++i) {
      out.objectives[i] = fo[i].v;
      for (int k = 0; k < 5; ++k) out.objectives_x(i, k) = fo[i].d[k];
      for (int k = 0; k < 2; ++k) out.objectives_y(i, k) = fo[i].d[5 + k];
    }
    for (int i = 0; i < 7; ++i) {
      out.constraints[i] = go[i].v;
      for (int k = 0; k < 5; ++k) out.constraints_x(i, k) = go[i].d[k];
      for (int k = 0; k < 2; ++k) out.constraints_y(i, k) = go[i].d[5 + k];
    }
  }
};

}  // namespace

ProblemSpec BuildSp1() {
  UncertaintySet set;
  set.params = {{"u", -1.0, 1.0, 0.0}};
  return ProblemSpec(
      "sp1",
      {{"x", 0.0, 1.0, VariableRole::kHereAndNow, 0.5},
       {"y", 0.0, 1.0, VariableRole::kWaitAndSee, 0.5}},
      std::move(set), {"f1", "f2"}, {"g"}, std::make_shared<Sp1Model>());
}

ProblemSpec BuildSp2() {
  UncertaintySet set;
  set.params = {{"u1", -1.0, 1.0, 0.0}, {"u2", -1.0, 1.0, 0.0}};
  return ProblemSpec(
      "sp2",
      {{"x", 0.0, 1.0, VariableRole::kHereAndNow, 0.5},
       {"y", 0.0, 1.0, VariableRole::kWaitAndSee, 0.5}},
      std::move(set), {"f1", "f2"}, {"g", "capacity"},
      std::make_shared<Sp2Model>());
}

ProblemSpec BuildColumnSurrogate() {
  UncertaintySet set;
  set.params = {{"F12", 0.9, 1.1, 1.0},
                {"w_MF", 0.78, 0.82, 0.8},
                {"l", 0.6, 1.2, 1.0}};
  return ProblemSpec(
      "column_surrogate",
      {{"N", 10.0, 150.0, VariableRole::kHereAndNow, 33.0},
       {"N_f", 3.0, 40.0, VariableRole::kHereAndNow, 5.0},
       {"D", 0.8, 2.0, VariableRole::kHereAndNow, 1.09},
       {"A_r", 50.0, 1000.0, VariableRole::kHereAndNow, 216.98},
       {"A_c", 50.0, 1000.0, VariableRole::kHereAndNow, 191.91},
       {"R_V", 0.5, 2.0, VariableRole::kWaitAndSee, 0.74},
       {"Q_r", 0.0625, 0.375, VariableRole::kWaitAndSee, 0.21}},
      std::move(set), {"CAPEX", "OPEX"},
      {"w_MF_top_min", "w_MeOH_bot_min", "Q_r_max", "Q_c_max", "F_max",
       "energy_balance", "feed_stage"},
      std::make_shared<ColumnModel>());
}

std::vector<std::string> BuiltinModelNames() {
  return {"sp1", "sp2", "column_surrogate"};
}

std::optional<ProblemSpec> BuildBuiltin(const std::string& name) {
  if (name == "sp1") return BuildSp1();
  if (name == "sp2") return BuildSp2();
  if (name == "column_surrogate") return BuildColumnSurrogate();
  return std::nullopt;
}

}  // namespace maro
