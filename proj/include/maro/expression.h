#ifndef MARO_EXPRESSION_H_
#define MARO_EXPRESSION_H_

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "maro/problem.h"

namespace maro {

// Models written as JSON expression trees. A tree node is a number, the
// name of a variable or uncertain parameter, or {"op": name, "args": [...]}.
// Operators: add, sub, mul, div (n-ary where it makes sense), neg, pow, exp,
// log, sqrt, sin, cos, tanh, square. Gradients come from central finite
// differences.
struct ExpressionNames {
  std::vector<std::string> hnv;
  std::vector<std::string> wsv;
  std::vector<std::string> params;
};

// Throws Error(kSchema) with a JSON-pointer path relative to `path` for
// unknown names, operators or arities.
std::shared_ptr<const Model> MakeExpressionModel(const nlohmann::json& objectives,
                                                 const nlohmann::json& constraints,
                                                 const ExpressionNames& names,
                                                 const std::string& path = "/model");

const std::vector<std::string>& ExpressionOperators();

}  // namespace maro

#endif  // MARO_EXPRESSION_H_
