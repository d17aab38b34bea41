// Acceptance harness: one PASS or FAIL line per acceptance criterion, with
// the measured quantities. Exit status 0 only when every line passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <fmt/core.h>

#include "maro/case_study.h"
#include "maro/nlp.h"
#include "maro/pipeline.h"
#include "maro/service.h"

#include <httplib.h>

using namespace maro;

namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

int failures = 0;

void Report(const std::string& name, bool ok, const std::string& detail) {
  fmt::print("{} {}: {}\n", ok ? "PASS" : "FAIL", name, detail);
  std::fflush(stdout);
  if (!ok) ++failures;
}

// Runs one criterion; an exception counts as a failure and is reported.
void Criterion(const std::string& name, const std::function<std::pair<bool, std::string>()>& body) {
  try {
    const auto [ok, detail] = body();
    Report(name, ok, detail);
  } catch (const std::exception& e) {
    Report(name, false, fmt::format("error: {}", e.what()));
  }
}

struct Case {
  std::string name;
  Json doc;
  ProblemSpec spec;
  RunSettings settings;
  ReferenceDiscretization reference;
  std::map<std::string, FrontRun> runs;

  const FrontRun& Run(const std::string& key) {
    auto it = runs.find(key);
    if (it == runs.end()) {
      it = runs.emplace(key, ComputeFront(spec, reference, key, settings)).first;
    }
    return it->second;
  }
};

Case LoadCase(const std::string& file) {
  Json doc;
  ProblemSpec spec = LoadProblemFile(MARO_SOURCE_DIR "/problems/" + file, &doc);
  RunSettings settings;
  settings.discretization = DiscretizationDefaults(doc);
  ReferenceDiscretization ref = Discretize(spec, settings);
  return Case{spec.name(), doc, std::move(spec), settings, std::move(ref), {}};
}

double MaxNormalizedDiff(const FrontApproximation& a, const FrontApproximation& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  const Normalization& n = b.normalization;
  double worst = 0.0;
  for (int i = 0; i < a.size(); ++i) {
    worst = std::max(worst, (n.Apply(a.points[i].objectives) - n.Apply(b.points[i].objectives))
                                .lpNorm<Eigen::Infinity>());
  }
  return worst;
}

bool RelClose(double a, double b) {
  return std::abs(a - b) <= 1e-4 * std::max(std::abs(a), std::abs(b)) + 1e-9;
}

// Largest relative mismatch count between analytic and central-difference
// Jacobians over 100 random points in the variable and uncertainty boxes.
int GradientMismatches(const ProblemSpec& spec) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&](const VectorXd& lo, const VectorXd& hi) {
    VectorXd v(lo.size());
    for (int i = 0; i < lo.size(); ++i) v[i] = lo[i] + unit(rng) * (hi[i] - lo[i]);
    return v;
  };
  int bad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const VectorXd x = draw(spec.HnvLower(), spec.HnvUpper());
    const VectorXd y = draw(spec.WsvLower(), spec.WsvUpper());
    const VectorXd u = draw(spec.uncertainty().Lower(), spec.uncertainty().Upper());
    ModelJacobians analytic, numeric;
    EvaluateWithJacobians(spec, x, y, u, analytic);
    FiniteDifferenceJacobians(spec, x, y, u, numeric);
    for (const auto& [a, b] : {std::pair{&analytic.objectives_x, &numeric.objectives_x},
                               std::pair{&analytic.objectives_y, &numeric.objectives_y},
                               std::pair{&analytic.constraints_x, &numeric.constraints_x},
                               std::pair{&analytic.constraints_y, &numeric.constraints_y}}) {
      for (int i = 0; i < a->rows(); ++i)
        for (int j = 0; j < a->cols(); ++j) bad += !RelClose((*a)(i, j), (*b)(i, j));
    }
  }
  return bad;
}

NlpProblem UnitInterval() {
  NlpProblem p;
  p.n = 1;
  p.lower = VectorXd::Zero(1);
  p.upper = VectorXd::Ones(1);
  p.start = VectorXd::Constant(1, 0.9);
  return p;
}

std::string Command(const std::string& kind, const std::string& objective, double value) {
  return Json{{"command", kind}, {"objective", objective}, {"value", NumberToJson(value)}}.dump();
}

VectorXd Vec(const Json& j) { return VectorFromJson(j, ""); }

}  // namespace

int main() {
  const auto start = Clock::now();
  Case sp1 = LoadCase("sp1.json");
  Case sp2 = LoadCase("sp2.json");
  Case column = LoadCase("column.json");

  Criterion("oracle equivalence", [&] {
    const auto t0 = Clock::now();
    std::string detail;
    bool ok = true;
    for (Case* c : {&sp1, &sp2}) {
      RunSettings all = c->settings;
      all.adaptive = false;
      const FrontRun reference = ComputeFront(c->spec, c->reference, "maro", all);
      const FrontRun& adaptive = c->Run("maro");
      const double diff = MaxNormalizedDiff(adaptive.front, reference.front);
      ok = ok && adaptive.front.size() == 8 && diff <= 1e-4;
      detail += fmt::format("{} {} points, max normalized diff {:.2e}; ", c->name,
                            adaptive.front.size(), diff);
    }
    const double secs = Seconds(t0);
    ok = ok && secs < 120.0;
    return std::pair{ok, detail + fmt::format("runtime {:.1f} s", secs)};
  });

  Criterion("scenario economy", [&] {
    const FrontRun& adaptive = sp1.Run("maro");
    RunSettings all = sp1.settings;
    all.adaptive = false;
    const FrontRun reference = ComputeFront(sp1.spec, sp1.reference, "maro", all);
    const double share =
        static_cast<double>(adaptive.union_set.ids.size()) / sp1.reference.size();
    const bool ok = share <= 0.5 && adaptive.replicated_work < reference.replicated_work;
    return std::pair{ok, fmt::format("union {}/{} ({:.0f}%), replicated work {} vs {}",
                                     adaptive.union_set.ids.size(), sp1.reference.size(),
                                     100 * share, adaptive.replicated_work,
                                     reference.replicated_work)};
  });

  Criterion("discretization count", [&] {
    const ReferenceDiscretization col = GenerateBox(BuildColumnSurrogate().uncertainty());
    const ReferenceDiscretization box = GenerateBox(BuildSp2().uncertainty());
    const bool col_nominal = col.nominal().id == col.size();
    const bool ok = col.size() == 28 && col_nominal && box.size() == 9;
    return std::pair{ok, fmt::format("column {} (nominal appended: {}), 2D box {}", col.size(),
                                     col_nominal, box.size())};
  });

  Criterion("front ordering", [&] {
    std::string detail;
    bool ok = true;
    for (Case* c : {&sp1, &column}) {
      const FrontApproximation& nominal = c->Run("nominal").front;
      const FrontApproximation& maro = c->Run("maro").front;
      const FrontApproximation& mro = c->Run("mro").front;
      const double a = DominanceCheck(nominal, maro, maro.normalization).max_exceedance;
      const double b = DominanceCheck(maro, mro, maro.normalization).max_exceedance;
      ok = ok && a <= 1e-6 && b <= 1e-6;
      detail += fmt::format("{} nominal-MARO {:.2e}, MARO-MRO {:.2e}; ", c->name, a, b);
    }
    detail.resize(detail.size() - 2);
    return std::pair{ok, detail};
  });

  Criterion("scenario-front bound", [&] {
    const FrontApproximation& maro = sp1.Run("maro").front;
    double worst = -std::numeric_limits<double>::infinity();
    int worst_id = 0;
    for (const Scenario& s : sp1.reference.scenarios()) {
      const FrontRun run =
          ComputeFront(sp1.spec, sp1.reference, fmt::format("scenario:{}", s.id), sp1.settings);
      const double e = DominanceCheck(run.front, maro, maro.normalization).max_exceedance;
      if (e > worst) {
        worst = e;
        worst_id = s.id;
      }
    }
    return std::pair{worst <= 1e-6,
                     fmt::format("{} scenario fronts, max exceedance {:.2e} (scenario {})",
                                 sp1.reference.size(), worst, worst_id)};
  });

  Criterion("price properties", [&] {
    std::string detail;
    bool ok = true;
    for (Case* c : {&sp1, &sp2, &column}) {
      FrontApproximation nominal = c->Run("nominal").front;
      PriceFrontOptions popts = c->settings.price;
      popts.nsr.nlp.seed = c->settings.seed;
      const std::vector<PriceReport> reports =
          PriceFront(c->spec, c->Run("maro").front, nominal, NominalSolver(c->spec, c->settings),
                     popts);
      double nsr_excess = -std::numeric_limits<double>::infinity();
      double min_price = std::numeric_limits<double>::infinity();
      double min_alpha = std::numeric_limits<double>::infinity();
      int misses = 0;
      for (const PriceReport& r : reports) {
        nsr_excess = std::max(nsr_excess, (r.f_nsr - r.f_maro).maxCoeff());
        min_price = std::min(min_price, r.p_r.minCoeff());
        // alpha* is an intersection property; a miss reports the endpoint.
        misses += r.ray_misses_front;
        if (!r.d_zero && !r.ray_misses_front) min_alpha = std::min(min_alpha, r.alpha_star);
      }
      ok = ok && nsr_excess <= 1e-6 && min_price >= -1e-6 && min_alpha >= 1.0 - 1e-6;
      detail += fmt::format(
          "{} max(F_nsr - F_maro) {:.2e}, min p_R {:.2e}, min alpha* {:.6f} ({} of {} rays "
          "miss the nominal front)",
          c->name, nsr_excess, min_price, min_alpha, misses, reports.size());
      if (c == &sp1) {
        const double end = std::abs(reports.back().p_r[1]);
        ok = ok && end <= 1e-6;
        detail += fmt::format(", end price f2 {:.2e}", end);
      }
      detail += "; ";
    }
    detail.resize(detail.size() - 2);
    return std::pair{ok, detail};
  });

  Criterion("cutting-plane certificate", [&] {
    std::string detail;
    bool ok = true;
    for (Case* c : {&sp1, &sp2, &column}) {
      for (const char* key : {"maro", "mro"}) {
        double excess = -std::numeric_limits<double>::infinity();
        double violation = 0.0;
        const FrontApproximation& front = c->Run(key).front;
        for (const ParetoPoint& p : front.points) {
          const Certificate cert = CertifyAgainstReference(c->spec, c->reference, p);
          excess = std::max(excess, cert.objective_excess.maxCoeff());
          violation = std::max(violation, cert.max_violation);
          ok = ok && cert.Holds(1e-6);
        }
        detail += fmt::format("{} {} {} points: objective excess {:.2e}, violation {:.2e}; ",
                              c->name, key, front.size(), excess, violation);
      }
    }
    detail.resize(detail.size() - 2);
    return std::pair{ok, detail};
  });

  Criterion("numerical hygiene", [&] {
    std::string detail;
    bool ok = true;
    for (const std::string& name : BuiltinModelNames()) {
      const int bad = GradientMismatches(*BuildBuiltin(name));
      ok = ok && bad == 0;
      detail += fmt::format("{} gradient mismatches {}/100 points; ", name, bad);
    }
    NlpProblem quad = UnitInterval();
    quad.evaluate = [](const VectorXd& z, double& f, VectorXd& c, VectorXd* g, MatrixXd* j) {
      f = (z[0] - 0.3) * (z[0] - 0.3);
      c.resize(0);
      if (g) *g = VectorXd::Constant(1, 2.0 * (z[0] - 0.3));
      if (j) j->resize(0, 1);
    };
    const NlpResult q = Solve(quad);
    const double quad_err = std::max(std::abs(q.x[0] - 0.3), std::abs(q.f));
    NlpProblem active = UnitInterval();
    active.m = 1;
    active.evaluate = [](const VectorXd& z, double& f, VectorXd& c, VectorXd* g, MatrixXd* j) {
      f = z[0];
      c = VectorXd::Constant(1, 0.7 - z[0]);
      if (g) *g = VectorXd::Ones(1);
      if (j) *j = MatrixXd::Constant(1, 1, -1.0);
    };
    const NlpResult a = Solve(active);
    const double active_err = std::max(std::abs(a.x[0] - 0.7), a.max_violation);
    ok = ok && q.status == NlpStatus::kOptimal && quad_err <= 1e-6 &&
         a.status == NlpStatus::kOptimal && active_err <= 1e-6;
    detail += fmt::format("quadratic error {:.1e}, active-constraint error {:.1e}", quad_err,
                          active_err);
    return std::pair{ok, detail};
  });

  Criterion("service correctness", [&] {
    const RunArtifact golden = LoadArtifact(MARO_SOURCE_DIR "/tests/data/sp1_golden.json");
    const FrontApproximation& maro = golden.fronts.at("maro");

    // The golden artifact is what the offline pipeline produces today.
    const RunArtifact offline = RunPipeline(golden.problem, {"maro", "nominal"},
                                            SettingsFromJson(golden.settings), true);
    bool offline_same = offline.prices.size() == golden.prices.size();
    for (size_t i = 0; offline_same && i < golden.prices.size(); ++i) {
      offline_same = offline.prices[i].f_nsr == golden.prices[i].f_nsr &&
                     offline.prices[i].f_mo == golden.prices[i].f_mo &&
                     offline.prices[i].p_r == golden.prices[i].p_r &&
                     offline.fronts.at("maro").points[i].objectives == maro.points[i].objectives;
    }

    NavigationService svc(golden);
    int suite_failures = 0;
    const HttpReply opened = svc.Handle("POST", "/session", "");
    suite_failures += opened.status != 201;
    const std::string id = Json::parse(opened.body)["id"];
    const std::string cmd = "/session/" + id + "/command";
    const Json initial = Json::parse(svc.Handle("GET", "/session/" + id, "").body);

    int anchor_mismatches = 0;
    for (int i = 0; i < maro.size(); ++i) {
      const HttpReply r = svc.Handle("POST", cmd, Command("move", "f1", maro.points[i].objectives[0]));
      if (r.status != 200) {
        ++suite_failures;
        continue;
      }
      const Json s = Json::parse(r.body);
      const PriceReport& p = offline_same ? offline.prices[i] : golden.prices[i];
      anchor_mismatches += !(Vec(s["f_nav"]) == maro.points[i].objectives &&
                             Vec(s["markers"]["nsr"]) == p.f_nsr &&
                             Vec(s["markers"]["mo"]) == p.f_mo &&
                             Vec(s["markers"]["price"]) == p.p_r);
    }
    const double bound = maro.points[4].objectives[1];
    Json s = Json::parse(svc.Handle("POST", cmd, Command("restrict", "f2", bound)).body);
    suite_failures += !(Vec(s["f_nav"])[1] <= bound + 1e-9);
    s = Json::parse(
        svc.Handle("POST", cmd, Command("move", "f1", maro.points.front().objectives[0])).body);
    suite_failures += !(Vec(s["f_nav"])[1] <= bound + 1e-9);
    suite_failures += svc.Handle("POST", cmd,
                                 Command("restrict", "f2", std::numeric_limits<double>::infinity()))
                          .status != 200;
    suite_failures += svc.Handle("POST", cmd, Command("restrict", "f1", 0.5)).status != 200;
    suite_failures += svc.Handle("POST", cmd, Command("restrict", "f2", 0.3)).status != 409;
    s = Json::parse(svc.Handle("POST", cmd, R"({"command": "reset"})").body);
    suite_failures += s != initial;
    suite_failures += svc.Handle("POST", cmd, R"({"command": "move"})").status != 422;

    // Latency over HTTP on the 100-point front.
    const RunArtifact big = LoadArtifact(MARO_SOURCE_DIR "/tests/data/sp1_golden_100.json");
    const FrontApproximation& front = big.fronts.at("maro");
    NavigationService big_svc(big);
    httplib::Server server;
    big_svc.Mount(server);
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread listener([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    std::vector<double> latency;
    {
      httplib::Client client("127.0.0.1", port);
      const auto session = client.Post("/session", "", "application/json");
      suite_failures += !session || session->status != 201;
      const std::string big_id = session ? Json::parse(session->body)["id"].get<std::string>() : "";
      const double lo = front.points.front().objectives[0], hi = front.points.back().objectives[0];
      std::mt19937 rng(3);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      for (int k = 0; k < 500; ++k) {
        const std::string body = Command("move", "f1", lo + unit(rng) * (hi - lo));
        const auto t0 = Clock::now();
        const auto r = client.Post("/session/" + big_id + "/command", body, "application/json");
        latency.push_back(std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
        suite_failures += !r || r->status != 200;
      }
    }
    server.stop();
    listener.join();
    std::sort(latency.begin(), latency.end());
    const double p95 = latency[static_cast<size_t>(0.95 * (latency.size() - 1))];

    const bool ok = offline_same && suite_failures == 0 && anchor_mismatches == 0 && p95 <= 50.0;
    return std::pair{ok, fmt::format("golden equals offline run: {}, command suite failures {}, "
                                     "anchor mismatches {}/{}, p95 latency {:.2f} ms ({} points)",
                                     offline_same, suite_failures, anchor_mismatches, maro.size(),
                                     p95, front.size())};
  });

  fmt::print("{} failure(s), {:.1f} s\n", failures, Seconds(start));
  return failures == 0 ? 0 : 1;
}
