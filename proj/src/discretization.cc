#include "maro/discretization.h"

#include <cmath>
#include <utility>

#include <fmt/format.h>

#include "maro/error.h"

namespace maro {

ReferenceDiscretization::ReferenceDiscretization(std::vector<Scenario> scenarios,
                                                 std::string rule)
    : scenarios_(std::move(scenarios)), rule_(std::move(rule)) {
  int nominal_count = 0;
  for (int i = 0; i < size(); ++i) {
    if (scenarios_[i].is_nominal) {
      ++nominal_count;
      nominal_pos_ = i;
    }
    for (int j = 0; j < i; ++j) {
      if (scenarios_[j].id == scenarios_[i].id) {
        throw Error(ErrorKind::kInvalidSpec,
                    fmt::format("duplicate scenario id {}", scenarios_[i].id));
      }
      if (scenarios_[j].values == scenarios_[i].values) {
        throw Error(ErrorKind::kInvalidSpec,
                    fmt::format("scenarios {} and {} coincide", scenarios_[j].id,
                                scenarios_[i].id));
      }
    }
  }
  if (nominal_count != 1) {
    throw Error(ErrorKind::kInvalidSpec,
                "a discretization needs exactly one nominal scenario");
  }
}

const Scenario& ReferenceDiscretization::ById(int id) const {
  for (const Scenario& s : scenarios_) {
    if (s.id == id) return s;
  }
  throw Error(ErrorKind::kInvalidSpec, fmt::format("unknown scenario id {}", id));
}

bool ReferenceDiscretization::Contains(int id) const {
  for (const Scenario& s : scenarios_) {
    if (s.id == id) return true;
  }
  return false;
}

std::vector<int> ReferenceDiscretization::Ids() const {
  std::vector<int> ids;
  for (const Scenario& s : scenarios_) ids.push_back(s.id);
  return ids;
}

namespace {

void CheckCap(double count, const DiscretizationOptions& options) {
  if (count > options.max_scenarios) {
    throw Error(ErrorKind::kDimensionTooLarge,
                fmt::format("discretization would need {} scenarios (cap {})",
                            count, options.max_scenarios));
  }
}

// Appends `values` unless already present; returns its position.
int AddUnique(std::vector<Scenario>& out, const VectorXd& values) {
  for (int i = 0; i < static_cast<int>(out.size()); ++i) {
    if (out[i].values == values) return i;
  }
  Scenario s;
  s.values = values;
  out.push_back(std::move(s));
  return static_cast<int>(out.size()) - 1;
}

ReferenceDiscretization Finish(std::vector<Scenario> scenarios,
                               const VectorXd& nominal, std::string rule) {
  const int pos = AddUnique(scenarios, nominal);
  scenarios[pos].is_nominal = true;
  for (int i = 0; i < static_cast<int>(scenarios.size()); ++i) {
    scenarios[i].id = i + 1;
    scenarios[i].label = scenarios[i].is_nominal ? fmt::format("u{} (nominal)", i + 1)
                                                 : fmt::format("u{}", i + 1);
  }
  return ReferenceDiscretization(std::move(scenarios), std::move(rule));
}

std::vector<double> AxisLevels(const UncertainParamSpec& p,
                               const DiscretizationOptions& options) {
  if (options.levels == BoxLevels::kVerticesAndMids) {
    return {p.lower, 0.5 * (p.lower + p.upper), p.upper};
  }
  const int n = options.uniform_levels;
  if (n < 2) {
    throw Error(ErrorKind::kInvalidSpec, "uniform grids need at least 2 levels");
  }
  std::vector<double> levels(n);
  for (int i = 0; i < n; ++i) {
    levels[i] = i == n - 1 ? p.upper : p.lower + (p.upper - p.lower) * i / (n - 1);
  }
  return levels;
}

}  // namespace

ReferenceDiscretization GenerateBox(const UncertaintySet& set,
                                    const DiscretizationOptions& options) {
  if (set.geometry != Geometry::kBox) {
    throw Error(ErrorKind::kInvalidSpec, "box rule applied to a non-box set");
  }
  const int d = set.dim();
  std::vector<std::vector<double>> axes;
  double count = 1.0;
  for (const UncertainParamSpec& p : set.params) {
    axes.push_back(AxisLevels(p, options));
    count *= static_cast<double>(axes.back().size());
  }
  CheckCap(count + 1.0, options);

  std::vector<Scenario> scenarios;
  std::vector<int> digit(d, 0);
  const long total = static_cast<long>(count);
  for (long k = 0; k < total; ++k) {
    VectorXd v(d);
    for (int i = 0; i < d; ++i) v[i] = axes[i][digit[i]];
    AddUnique(scenarios, v);
    // Odometer increment, last axis fastest.
    for (int i = d - 1; i >= 0; --i) {
      if (++digit[i] < static_cast<int>(axes[i].size())) break;
      digit[i] = 0;
    }
  }
  const std::string rule = options.levels == BoxLevels::kVerticesAndMids
                               ? "box:vertices_and_mids"
                               : fmt::format("box:uniform{}", options.uniform_levels);
  return Finish(std::move(scenarios), set.Nominal(), rule);
}

ReferenceDiscretization GenerateEllipsoid(const UncertaintySet& set,
                                          const DiscretizationOptions& options) {
  if (set.geometry != Geometry::kEllipsoid) {
    throw Error(ErrorKind::kInvalidSpec, "ellipsoid rule applied to a non-ellipsoid set");
  }
  const int d = set.dim();
  CheckCap(2.0 * d + std::pow(2.0, d) + 1.0, options);
  const VectorXd& c = set.center;
  const VectorXd& r = set.radii;

  std::vector<Scenario> scenarios;
  for (int i = 0; i < d; ++i) {
    for (double sign : {-1.0, 1.0}) {
      VectorXd v = c;
      v[i] += sign * r[i];
      AddUnique(scenarios, v);
    }
  }
  const double norm = std::sqrt(static_cast<double>(d));
  const long patterns = 1L << d;
  for (long mask = 0; mask < patterns; ++mask) {
    VectorXd v(d);
    for (int i = 0; i < d; ++i) {
      const bool positive = (mask >> (d - 1 - i)) & 1L;
      v[i] = c[i] + (positive ? 1.0 : -1.0) * r[i] / norm;
    }
    AddUnique(scenarios, v);
  }
  return Finish(std::move(scenarios), set.Nominal(), "ellipsoid:axes_and_diagonals");
}

ReferenceDiscretization Generate(const UncertaintySet& set,
                                 const DiscretizationOptions& options) {
  return set.geometry == Geometry::kBox ? GenerateBox(set, options)
                                        : GenerateEllipsoid(set, options);
}

ReferenceDiscretization NominalOnly(const UncertaintySet& set) {
  return Finish({}, set.Nominal(), "nominal");
}

}  // namespace maro
