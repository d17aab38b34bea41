#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "maro/case_study.h"
#include "maro/discretization.h"
#include "maro/error.h"

using namespace maro;

namespace {

UncertaintySet Box(std::vector<UncertainParamSpec> params) {
  UncertaintySet set;
  set.params = std::move(params);
  return set;
}

UncertaintySet Ellipsoid(int d, VectorXd radii) {
  UncertaintySet set;
  set.geometry = Geometry::kEllipsoid;
  for (int i = 0; i < d; ++i) {
    set.params.push_back({"u" + std::to_string(i), -radii[i], radii[i], 0.0});
  }
  set.center = VectorXd::Zero(d);
  set.radii = std::move(radii);
  return set;
}

int CountNominal(const ReferenceDiscretization& ref) {
  int n = 0;
  for (const Scenario& s : ref.scenarios()) n += s.is_nominal;
  return n;
}

}  // namespace

TEST_CASE("column surrogate ranges give 3^3 + 1 = 28 scenarios") {
  const ProblemSpec col = BuildColumnSurrogate();
  const ReferenceDiscretization ref = GenerateBox(col.uncertainty());
  CHECK(ref.size() == 28);
  CHECK(CountNominal(ref) == 1);
  // The load's mid level (0.9) differs from its nominal 1.0, so the nominal
  // is appended last.
  CHECK(ref.nominal().id == 28);
  CHECK(ref.scenarios().back().is_nominal);
  // Lexicographic numbering with the load running fastest.
  CHECK(ref.ById(25).values == (VectorXd(3) << 1.1, 0.82, 0.6).finished());
  CHECK(ref.ById(27).values == (VectorXd(3) << 1.1, 0.82, 1.2).finished());
  CHECK(ref.ById(3).values == (VectorXd(3) << 0.9, 0.78, 1.2).finished());
  CHECK(ref.ById(6).values == (VectorXd(3) << 0.9, 0.80, 1.2).finished());
  CHECK(ref.ById(21).values == (VectorXd(3) << 1.1, 0.78, 1.2).finished());
}

TEST_CASE("2D unit box with centred nominal gives 9 scenarios") {
  const ReferenceDiscretization ref =
      GenerateBox(Box({{"a", 0.0, 1.0, 0.5}, {"b", 0.0, 1.0, 0.5}}));
  CHECK(ref.size() == 9);
  CHECK(ref.nominal().id == 5);
  CHECK(CountNominal(ref) == 1);
}

TEST_CASE("1D box with off-centre nominal") {
  const ReferenceDiscretization ref = GenerateBox(Box({{"a", 0.0, 1.0, 0.25}}));
  REQUIRE(ref.size() == 4);
  const double expected[] = {0.0, 0.5, 1.0, 0.25};
  for (int i = 0; i < 4; ++i) CHECK(ref.scenarios()[i].values[0] == expected[i]);
  CHECK(ref.scenarios()[3].is_nominal);
}

TEST_CASE("degenerate axes collapse duplicates") {
  const ReferenceDiscretization ref =
      GenerateBox(Box({{"a", 0.3, 0.3, 0.3}, {"b", 0.0, 1.0, 0.5}}));
  CHECK(ref.size() == 3);
  const ReferenceDiscretization single = GenerateBox(Box({{"a", 2.0, 2.0, 2.0}}));
  CHECK(single.size() == 1);
  CHECK(single.nominal().id == 1);
}

TEST_CASE("uniform grids") {
  DiscretizationOptions opts;
  opts.levels = BoxLevels::kUniform;
  opts.uniform_levels = 21;
  const ReferenceDiscretization ref = GenerateBox(Box({{"u", -1.0, 1.0, 0.0}}), opts);
  CHECK(ref.size() == 21);
  CHECK(ref.scenarios().front().values[0] == -1.0);
  CHECK(ref.scenarios().back().values[0] == 1.0);
  CHECK(ref.nominal().id == 11);
}

TEST_CASE("ellipsoid piercing points") {
  SUBCASE("unit circle") {
    const ReferenceDiscretization ref = GenerateEllipsoid(Ellipsoid(2, VectorXd::Ones(2)));
    CHECK(ref.size() == 9);
    CHECK(ref.scenarios().back().is_nominal);
  }
  SUBCASE("3D sphere") {
    const ReferenceDiscretization ref = GenerateEllipsoid(Ellipsoid(3, VectorXd::Ones(3)));
    CHECK(ref.size() == 15);
  }
  SUBCASE("every non-nominal point lies on the boundary") {
    VectorXd radii(3);
    radii << 0.5, 2.0, 1.25;
    const UncertaintySet set = Ellipsoid(3, radii);
    const ReferenceDiscretization ref = GenerateEllipsoid(set);
    for (const Scenario& s : ref.scenarios()) {
      CHECK(set.Contains(s.values));
      if (s.is_nominal) continue;
      double sum = 0.0;
      for (int i = 0; i < 3; ++i) {
        const double z = (s.values[i] - set.center[i]) / radii[i];
        sum += z * z;
      }
      CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("scenario cap") {
  std::vector<UncertainParamSpec> params;
  for (int i = 0; i < 9; ++i) params.push_back({"u" + std::to_string(i), 0, 1, 0.5});
  try {
    GenerateBox(Box(params));
    FAIL("expected DimensionTooLarge");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDimensionTooLarge);
  }
  DiscretizationOptions opts;
  opts.max_scenarios = 20000;
  CHECK(GenerateBox(Box(params), opts).size() == 19683);
  VectorXd radii = VectorXd::Ones(14);
  CHECK_THROWS_AS(GenerateEllipsoid(Ellipsoid(14, radii)), Error);
}

TEST_CASE("regeneration is stable and stays inside the set") {
  const ProblemSpec sp2 = BuildSp2();
  const ReferenceDiscretization a = Generate(sp2.uncertainty());
  const ReferenceDiscretization b = Generate(sp2.uncertainty());
  REQUIRE(a.size() == b.size());
  for (int i = 0; i < a.size(); ++i) {
    CHECK(a.scenarios()[i].id == b.scenarios()[i].id);
    CHECK(a.scenarios()[i].values == b.scenarios()[i].values);
    CHECK(sp2.uncertainty().Contains(a.scenarios()[i].values));
  }
}

TEST_CASE("discretization invariants are enforced") {
  Scenario s1{1, VectorXd::Zero(1), true, "a"};
  Scenario s2{2, VectorXd::Zero(1), false, "b"};
  CHECK_THROWS_AS(ReferenceDiscretization({s1, s2}, "manual"), Error);
  s2.values = VectorXd::Ones(1);
  s2.is_nominal = true;
  CHECK_THROWS_AS(ReferenceDiscretization({s1, s2}, "manual"), Error);
  s2.is_nominal = false;
  CHECK_NOTHROW(ReferenceDiscretization({s1, s2}, "manual"));
}
