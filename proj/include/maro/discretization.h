#ifndef MARO_DISCRETIZATION_H_
#define MARO_DISCRETIZATION_H_

#include <string>
#include <vector>

#include "maro/problem.h"

namespace maro {

struct Scenario {
  int id = 0;  // 1-based position in the reference discretization
  VectorXd values;
  bool is_nominal = false;
  std::string label;
};

// Finite stand-in for the uncertainty set. Always holds exactly one nominal
// scenario and no duplicate value vectors.
class ReferenceDiscretization {
 public:
  ReferenceDiscretization() = default;
  ReferenceDiscretization(std::vector<Scenario> scenarios, std::string rule);

  const std::vector<Scenario>& scenarios() const { return scenarios_; }
  const std::string& rule() const { return rule_; }
  int size() const { return static_cast<int>(scenarios_.size()); }
  const Scenario& nominal() const { return scenarios_[nominal_pos_]; }
  // Throws kInvalidSpec when the id is unknown.
  const Scenario& ById(int id) const;
  bool Contains(int id) const;
  std::vector<int> Ids() const;

 private:
  std::vector<Scenario> scenarios_;
  std::string rule_;
  int nominal_pos_ = 0;
};

enum class BoxLevels {
  kVerticesAndMids,  // {lower, mid, upper} per axis
  kUniform,          // `levels` equidistant values per axis
};

struct DiscretizationOptions {
  BoxLevels levels = BoxLevels::kVerticesAndMids;
  int uniform_levels = 3;
  int max_scenarios = 10000;
};

ReferenceDiscretization GenerateBox(const UncertaintySet& set,
                                    const DiscretizationOptions& options = {});

ReferenceDiscretization GenerateEllipsoid(const UncertaintySet& set,
                                          const DiscretizationOptions& options = {});

// Dispatches on the set's geometry.
ReferenceDiscretization Generate(const UncertaintySet& set,
                                 const DiscretizationOptions& options = {});

// A discretization holding only the nominal scenario (id 1).
ReferenceDiscretization NominalOnly(const UncertaintySet& set);

}  // namespace maro

#endif  // MARO_DISCRETIZATION_H_
