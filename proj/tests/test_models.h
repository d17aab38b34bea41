// Small models used only by the test suites.
#ifndef MARO_TESTS_TEST_MODELS_H_
#define MARO_TESTS_TEST_MODELS_H_

#include <cmath>
#include <limits>
#include <memory>

#include "maro/problem.h"

namespace maro::testing {

// f = (x^2, (1-x)^2) plus a constant third output; symmetric under x <-> 1-x.
class SymmetricModel final : public Model {
 public:
  void Evaluate(const VectorXd& x, const VectorXd&, const VectorXd& u,
                VectorXd& f, VectorXd& g) const override {
    f[0] = x[0] * x[0] + 0.0 * u[0];
    f[1] = (1.0 - x[0]) * (1.0 - x[0]);
    g[0] = -1.0;
  }
};

inline ProblemSpec Symmetric() {
  UncertaintySet set;
  set.params = {{"u", -1.0, 1.0, 0.0}};
  return ProblemSpec("symmetric", {{"x", 0.0, 1.0, VariableRole::kHereAndNow, 0.3}},
                     set, {"f1", "f2"}, {"g"}, std::make_shared<SymmetricModel>());
}

// f1 = x^2, f2 = 3 (constant): single-point front.
class ConstantSecondModel final : public Model {
 public:
  void Evaluate(const VectorXd& x, const VectorXd&, const VectorXd&, VectorXd& f,
                VectorXd& g) const override {
    f[0] = (x[0] - 0.25) * (x[0] - 0.25);
    f[1] = 3.0;
    g[0] = -1.0;
  }
};

inline ProblemSpec ConstantSecond() {
  UncertaintySet set;
  set.params = {{"u", -1.0, 1.0, 0.0}};
  return ProblemSpec("constant_second",
                     {{"x", 0.0, 1.0, VariableRole::kHereAndNow, 0.5}}, set,
                     {"f1", "f2"}, {"g"}, std::make_shared<ConstantSecondModel>());
}

// SP1 with the operating variable frozen at y = 0.5: no wait-and-see block.
class Sp1StaticModel final : public Model {
 public:
  void Evaluate(const VectorXd& x, const VectorXd&, const VectorXd& u,
                VectorXd& f, VectorXd& g) const override {
    const double a = x[0], b = 0.5, s = u[0];
    f[0] = a * a + b + 0.2 * s * (1.0 - b);
    f[1] = (1.0 - a) * (1.0 - a) + 0.5 * (1.0 - b) + 0.2 * s * b;
    g[0] = s * (0.5 - b) - 0.3;
  }
};

inline ProblemSpec Sp1Static() {
  UncertaintySet set;
  set.params = {{"u", -1.0, 1.0, 0.0}};
  return ProblemSpec("sp1_static", {{"x", 0.0, 1.0, VariableRole::kHereAndNow, 0.5}},
                     set, {"f1", "f2"}, {"g"}, std::make_shared<Sp1StaticModel>());
}

// SP1 objectives with the uncertainty removed from every output.
class Sp1CertainModel final : public Model {
 public:
  void Evaluate(const VectorXd& x, const VectorXd& y, const VectorXd&,
                VectorXd& f, VectorXd& g) const override {
    const double a = x[0], b = y[0];
    f[0] = a * a + b;
    f[1] = (1.0 - a) * (1.0 - a) + 0.5 * (1.0 - b);
    g[0] = 0.2 - b;
  }
};

inline ProblemSpec Sp1Certain() {
  UncertaintySet set;
  set.params = {{"u", -1.0, 1.0, 0.0}};
  return ProblemSpec("sp1_certain",
                     {{"x", 0.0, 1.0, VariableRole::kHereAndNow, 0.5},
                      {"y", 0.0, 1.0, VariableRole::kWaitAndSee, 0.5}},
                     set, {"f1", "f2"}, {"g"}, std::make_shared<Sp1CertainModel>());
}

class NanModel final : public Model {
 public:
  void Evaluate(const VectorXd&, const VectorXd&, const VectorXd&, VectorXd& f,
                VectorXd& g) const override {
    f[0] = std::numeric_limits<double>::quiet_NaN();
    f[1] = 0.0;
    g[0] = 0.0;
  }
};

inline ProblemSpec NanProblem() {
  UncertaintySet set;
  set.params = {{"u", -1.0, 1.0, 0.0}};
  return ProblemSpec("nan", {{"x", 0.0, 1.0, VariableRole::kHereAndNow, 0.5}}, set,
                     {"f1", "f2"}, {"g"}, std::make_shared<NanModel>());
}

// g = 1 + u > 0 everywhere: no feasible point exists.
class AlwaysViolatedModel final : public Model {
 public:
  void Evaluate(const VectorXd& x, const VectorXd&, const VectorXd& u, VectorXd& f,
                VectorXd& g) const override {
    f[0] = x[0];
    f[1] = 1.0 - x[0];
    g[0] = 1.0 + u[0];
  }
};

}  // namespace maro::testing

#endif  // MARO_TESTS_TEST_MODELS_H_
