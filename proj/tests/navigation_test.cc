#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <limits>

#include "maro/adaptive.h"
#include "maro/case_study.h"
#include "maro/error.h"
#include "maro/navigation.h"

using namespace maro;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

VectorXd V2(double a, double b) { return (VectorXd(2) << a, b).finished(); }

ParetoPoint At(const VectorXd& f) {
  ParetoPoint p;
  p.objectives = f;
  p.solution.x = VectorXd::Constant(1, f[0]);
  p.scalarization.weights = V2(0.5, 0.5);
  return p;
}

// Synthetic data: MARO points on the line f1 + f2 = 2 (offset by one from a
// nominal front f1 + f2 = 1), with NSR values halfway in between.
std::shared_ptr<const NavigationData> LineData(int n) {
  auto d = std::make_shared<NavigationData>();
  for (int i = 0; i < n; ++i) {
    const double a = n == 1 ? 0.5 : static_cast<double>(i) / (n - 1);
    d->maro_front.points.push_back(At(V2(0.5 + a, 1.5 - a)));
    NsrResult r;
    r.objectives = V2(0.25 + a, 1.25 - a);
    r.y = VectorXd::Constant(1, a);
    d->nsr.push_back(r);
  }
  d->nominal_front.points = {At(V2(0.0, 1.0)), At(V2(1.0, 0.0))};
  d->nominal_front.normalization = {V2(0.0, 0.0), V2(1.0, 1.0)};
  d->objective_names = {"f1", "f2"};
  return d;
}

struct Sp1Nav {
  std::shared_ptr<const NavigationData> data;
  std::vector<PriceReport> reports;
};

const Sp1Nav& Sp1() {
  static const Sp1Nav nav = [] {
    const ProblemSpec sp1 = BuildSp1();
    DiscretizationOptions opts;
    opts.levels = BoxLevels::kUniform;
    opts.uniform_levels = 21;
    const ReferenceDiscretization ref = GenerateBox(sp1.uncertainty(), opts);
    AdaptiveFrontSolver solver(sp1, ref, SolveMode::kAdjustable);
    const FrontApproximation maro = Sandwich(std::ref(solver), SolveMode::kAdjustable);
    const ReferenceDiscretization nom_ref = NominalOnly(sp1.uncertainty());
    const PointSolver nominal = [&](const ScalarizationSpec& s) {
      return SolvePoint(sp1, {nom_ref.nominal()}, s, SolveMode::kNominal);
    };
    FrontApproximation nom = Sandwich(nominal, SolveMode::kNominal);
    Sp1Nav out;
    out.reports = PriceFront(sp1, maro, nom, nominal);
    out.data = std::make_shared<NavigationData>(MakeNavigationData(sp1, maro, nom, out.reports));
    return out;
  }();
  return nav;
}

bool SameSnapshot(const SessionSnapshot& a, const SessionSnapshot& b) {
  return a.lambda == b.lambda && a.f_nav == b.f_nav && a.markers.nsr == b.markers.nsr &&
         a.markers.mo == b.markers.mo && a.markers.price == b.markers.price &&
         a.restrictions == b.restrictions;
}

}  // namespace

TEST_CASE("opening a session") {
  SUBCASE("one-point front") {
    NavigationSession s(LineData(1));
    CHECK(s.Snapshot().lambda == std::vector<std::pair<int, double>>{{0, 1.0}});
    const MoveOutcome o = s.Move(0, 5.0);
    CHECK(o.clamped);
    CHECK(s.Snapshot().lambda == std::vector<std::pair<int, double>>{{0, 1.0}});
  }
  SUBCASE("even count starts between the middle points") {
    NavigationSession s(LineData(4));
    const auto l = s.Snapshot().lambda;
    REQUIRE(l.size() == 2);
    CHECK(l[0] == std::pair<int, double>{1, 0.5});
    CHECK(l[1] == std::pair<int, double>{2, 0.5});
  }
  SUBCASE("odd count starts at the middle point") {
    NavigationSession s(LineData(5));
    CHECK(s.Snapshot().lambda == std::vector<std::pair<int, double>>{{2, 1.0}});
  }
  SUBCASE("restrictions start unbounded") {
    NavigationSession s(LineData(3));
    CHECK(s.Snapshot().restrictions == VectorXd::Constant(2, kInf));
  }
  SUBCASE("missing NSR data") {
    auto d = std::make_shared<NavigationData>(*LineData(3));
    d->nsr.pop_back();
    try {
      NavigationSession s(d);
      FAIL("expected MissingNsr");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kMissingNsr);
    }
  }
}

TEST_CASE("markers on a synthetic line") {
  NavigationSession s(LineData(3));
  const SessionSnapshot snap = s.Snapshot();
  // Middle point (1, 1), NSR (0.75, 0.75): the ray hits (0.5, 0.5).
  CHECK(snap.f_nav == V2(1.0, 1.0));
  CHECK(snap.markers.nsr == V2(0.75, 0.75));
  CHECK(snap.markers.mo[0] == doctest::Approx(0.5));
  CHECK(snap.markers.price[0] == doctest::Approx(0.25));
  CHECK(snap.x[0] == 1.0);
  CHECK(snap.y_nsr[0] == 0.5);
}

TEST_CASE("moves") {
  NavigationSession s(LineData(5));
  SUBCASE("anchor target gives a unit lambda") {
    s.Move(0, 0.75);
    CHECK(s.Snapshot().lambda == std::vector<std::pair<int, double>>{{1, 1.0}});
    CHECK(s.Snapshot().markers.nsr == s.data().nsr[1].objectives);
  }
  SUBCASE("interior target") {
    s.Move(0, 0.6);
    const SessionSnapshot snap = s.Snapshot();
    CHECK(snap.f_nav[0] == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(snap.f_nav[1] == doctest::Approx(1.4).epsilon(1e-14));
    double sum = 0.0;
    for (auto [i, l] : snap.lambda) sum += l;
    CHECK(sum == doctest::Approx(1.0));
  }
  SUBCASE("opposite moves return to the start") {
    const VectorXd start = s.Snapshot().f_nav;
    s.Move(1, 0.7);
    s.Move(1, start[1]);
    CHECK((s.Snapshot().f_nav - start).norm() <= 1e-9);
  }
  SUBCASE("out-of-range targets are clamped") {
    const MoveOutcome o = s.Move(0, -3.0);
    CHECK(o.clamped);
    CHECK(o.applied == 0.5);
    CHECK(s.Snapshot().f_nav == V2(0.5, 1.5));
  }
  SUBCASE("invalid input") {
    CHECK_THROWS_AS(s.Move(2, 0.5), Error);
    CHECK_THROWS_AS(s.Move(0, std::nan("")), Error);
  }
}

TEST_CASE("restrictions") {
  NavigationSession s(LineData(5));
  SUBCASE("bound above the front is a no-op") {
    const SessionSnapshot before = s.Snapshot();
    s.SetRestriction(0, 10.0);
    CHECK(s.Snapshot().f_nav == before.f_nav);
    CHECK(s.Snapshot().lambda == before.lambda);
  }
  SUBCASE("bound excluding the current point moves to it") {
    s.SetRestriction(0, 0.8);
    CHECK(std::abs(s.Snapshot().f_nav[0] - 0.8) <= 1e-9);
    // Moves beyond the bound stop at it.
    const MoveOutcome o = s.Move(0, 1.4);
    CHECK(o.clamped);
    CHECK(std::abs(s.Snapshot().f_nav[0] - 0.8) <= 1e-9);
  }
  SUBCASE("bounds excluding everything fail and leave the session intact") {
    s.SetRestriction(0, 0.8);
    const SessionSnapshot before = s.Snapshot();
    try {
      s.SetRestriction(1, 1.0);  // needs f1 >= 1
      FAIL("expected InfeasibleRestrictions");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kInfeasibleRestrictions);
    }
    CHECK(SameSnapshot(before, s.Snapshot()));
  }
  SUBCASE("reset clears bounds") {
    s.SetRestriction(0, 0.8);
    s.Reset();
    CHECK(s.Snapshot().restrictions == VectorXd::Constant(2, kInf));
    CHECK(s.Snapshot().f_nav == V2(1.0, 1.0));
  }
}

TEST_CASE("sessions are deterministic") {
  NavigationSession a(LineData(7)), b(LineData(7));
  for (NavigationSession* s : {&a, &b}) {
    s->Move(0, 0.9);
    s->SetRestriction(1, 1.2);
    s->Move(1, 0.2);
  }
  CHECK(SameSnapshot(a.Snapshot(), b.Snapshot()));
}

TEST_CASE("SP1 markers match the offline price pipeline") {
  const Sp1Nav& nav = Sp1();
  NavigationSession s(nav.data);
  const SessionSnapshot snap = s.Snapshot();
  // Offline: interpolate the precomputed NSR values with the session's
  // lambda and price that point directly.
  ParetoPoint p;
  p.objectives = VectorXd::Zero(2);
  NsrResult nsr;
  nsr.objectives = VectorXd::Zero(2);
  for (auto [i, l] : snap.lambda) {
    p.objectives += l * nav.data->maro_front.points[i].objectives;
    nsr.objectives += l * nav.reports[i].f_nsr;
  }
  const PriceReport off =
      PriceFromNsr(p, ScalarizationSpec{}, nsr, nav.data->nominal_front);
  CHECK((snap.markers.nsr - off.f_nsr).lpNorm<Eigen::Infinity>() <= 1e-8);
  CHECK((snap.markers.mo - off.f_mo).lpNorm<Eigen::Infinity>() <= 1e-8);
  CHECK((snap.markers.price - off.p_r).lpNorm<Eigen::Infinity>() <= 1e-8);

  // At every anchor the markers are the stored report values.
  for (int i = 0; i < nav.data->maro_front.size(); ++i) {
    s.Move(0, nav.data->maro_front.points[i].objectives[0]);
    const SessionSnapshot a = s.Snapshot();
    REQUIRE(a.lambda.size() == 1);
    CHECK(a.lambda[0].first == i);
    CHECK(a.markers.nsr == nav.reports[i].f_nsr);
    CHECK(a.markers.mo == nav.reports[i].f_mo);
    CHECK(a.markers.price == nav.reports[i].p_r);
  }
}

TEST_CASE("SP1 price marker falls to zero along the high-f1 tail") {
  const Sp1Nav& nav = Sp1();
  NavigationSession s(nav.data);
  const auto& pts = nav.data->maro_front.points;
  const int n = static_cast<int>(pts.size());
  int tail = 0;
  while (tail < n && pts[tail].solution.x[0] < 0.75) ++tail;
  REQUIRE(tail < n);
  // At the anchors the marker is the stored price and falls monotonically.
  double prev = std::numeric_limits<double>::infinity();
  for (int i = tail; i < n; ++i) {
    s.Move(0, pts[i].objectives[0]);
    const double price = s.Snapshot().markers.price[1];
    CHECK(price <= prev + 1e-6);
    prev = price;
  }
  CHECK(std::abs(prev) <= 1e-6);
  // Between anchors the NSR marker is a chord over a convex nominal front,
  // so it may rise above the anchors' prices by at most the approximation
  // tolerance of the front.
  const double range2 = nav.data->maro_front.normalization.Range()[1];
  for (int i = tail; i + 1 < n; ++i) {
    const double cap = std::max(nav.reports[i].p_r[1], nav.reports[i + 1].p_r[1]);
    for (int k = 1; k < 10; ++k) {
      s.Move(0, pts[i].objectives[0] + (pts[i + 1].objectives[0] - pts[i].objectives[0]) * k / 10.0);
      const double price = s.Snapshot().markers.price[1];
      CHECK(price >= -1e-6);
      CHECK(price <= cap + 0.01 * range2);
    }
  }
}

TEST_CASE("moves on a 100-point front are fast") {
  NavigationSession s(LineData(100));
  std::vector<double> ms;
  for (int k = 0; k < 200; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    s.Move(k % 2, 0.5 + (k % 37) / 37.0);
    s.Snapshot();
    ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                     .count());
  }
  std::sort(ms.begin(), ms.end());
  CHECK(ms[189] <= 50.0);
}
