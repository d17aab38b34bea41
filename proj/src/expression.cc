#include "maro/expression.h"

#include <cmath>
#include <map>

#include <fmt/format.h>

#include "maro/error.h"

namespace maro {

namespace {

enum class Op { kConst, kHnv, kWsv, kParam, kAdd, kSub, kMul, kDiv, kNeg, kPow, kExp,
                kLog, kSqrt, kSin, kCos, kTanh, kSquare };

struct OpInfo {
  Op op;
  int min_args;
  int max_args;  // -1: unbounded
};

const std::map<std::string, OpInfo>& OpTable() {
  static const std::map<std::string, OpInfo> table = {
      {"add", {Op::kAdd, 1, -1}},  {"sub", {Op::kSub, 2, 2}},   {"mul", {Op::kMul, 1, -1}},
      {"div", {Op::kDiv, 2, 2}},   {"neg", {Op::kNeg, 1, 1}},   {"pow", {Op::kPow, 2, 2}},
      {"exp", {Op::kExp, 1, 1}},   {"log", {Op::kLog, 1, 1}},   {"sqrt", {Op::kSqrt, 1, 1}},
      {"sin", {Op::kSin, 1, 1}},   {"cos", {Op::kCos, 1, 1}},   {"tanh", {Op::kTanh, 1, 1}},
      {"square", {Op::kSquare, 1, 1}},
  };
  return table;
}

struct Node {
  Op op = Op::kConst;
  double value = 0.0;
  int slot = 0;
  std::vector<int> args;
};

// All trees share one node pool; roots index into it.
class Tape {
 public:
  int Parse(const nlohmann::json& j, const std::string& path, const ExpressionNames& names) {
    Node n;
    if (j.is_number()) {
      n.op = Op::kConst;
      n.value = j.get<double>();
    } else if (j.is_string()) {
      const std::string name = j.get<std::string>();
      if (!Resolve(name, names, n)) {
        throw Error(ErrorKind::kSchema, fmt::format("{}: unknown name '{}'", path, name));
      }
    } else if (j.is_object()) {
      if (!j.contains("op") || !j["op"].is_string()) {
        throw Error(ErrorKind::kSchema, fmt::format("{}/op: operator name required", path));
      }
      const std::string op = j["op"].get<std::string>();
      const auto it = OpTable().find(op);
      if (it == OpTable().end()) {
        throw Error(ErrorKind::kSchema, fmt::format("{}/op: unknown operator '{}'", path, op));
      }
      if (!j.contains("args") || !j["args"].is_array()) {
        throw Error(ErrorKind::kSchema, fmt::format("{}/args: array required", path));
      }
      const int count = static_cast<int>(j["args"].size());
      const OpInfo& info = it->second;
      if (count < info.min_args || (info.max_args >= 0 && count > info.max_args)) {
        throw Error(ErrorKind::kSchema,
                    fmt::format("{}/args: '{}' takes {} argument(s), got {}", path, op,
                                info.max_args == info.min_args
                                    ? std::to_string(info.min_args)
                                    : fmt::format("at least {}", info.min_args),
                                count));
      }
      n.op = info.op;
      for (int a = 0; a < count; ++a) {
        n.args.push_back(Parse(j["args"][a], fmt::format("{}/args/{}", path, a), names));
      }
    } else {
      throw Error(ErrorKind::kSchema,
                  fmt::format("{}: expected a number, a name or an operator object", path));
    }
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

  double Eval(int i, const VectorXd& x, const VectorXd& y, const VectorXd& u) const {
    const Node& n = nodes_[i];
    auto arg = [&](int k) { return Eval(n.args[k], x, y, u); };
    switch (n.op) {
      case Op::kConst: return n.value;
      case Op::kHnv: return x[n.slot];
      case Op::kWsv: return y[n.slot];
      case Op::kParam: return u[n.slot];
      case Op::kAdd: {
        double s = 0.0;
        for (size_t k = 0; k < n.args.size(); ++k) s += arg(k);
        return s;
      }
      case Op::kMul: {
        double p = 1.0;
        for (size_t k = 0; k < n.args.size(); ++k) p *= arg(k);
        return p;
      }
      case Op::kSub: return arg(0) - arg(1);
      case Op::kDiv: return arg(0) / arg(1);
      case Op::kNeg: return -arg(0);
      case Op::kPow: return std::pow(arg(0), arg(1));
      case Op::kExp: return std::exp(arg(0));
      case Op::kLog: return std::log(arg(0));
      case Op::kSqrt: return std::sqrt(arg(0));
      case Op::kSin: return std::sin(arg(0));
      case Op::kCos: return std::cos(arg(0));
      case Op::kTanh: return std::tanh(arg(0));
      case Op::kSquare: {
        const double v = arg(0);
        return v * v;
      }
    }
    return 0.0;
  }

 private:
  static bool Resolve(const std::string& name, const ExpressionNames& names, Node& n) {
    const std::pair<const std::vector<std::string>*, Op> blocks[] = {
        {&names.hnv, Op::kHnv}, {&names.wsv, Op::kWsv}, {&names.params, Op::kParam}};
    for (const auto& [list, op] : blocks) {
      for (size_t k = 0; k < list->size(); ++k) {
        if ((*list)[k] == name) {
          n.op = op;
          n.slot = static_cast<int>(k);
          return true;
        }
      }
    }
    return false;
  }

  std::vector<Node> nodes_;
};

class ExpressionModel final : public Model {
 public:
  ExpressionModel(Tape tape, std::vector<int> objectives, std::vector<int> constraints)
      : tape_(std::move(tape)),
        objectives_(std::move(objectives)),
        constraints_(std::move(constraints)) {}

  void Evaluate(const VectorXd& x, const VectorXd& y, const VectorXd& u, VectorXd& f,
                VectorXd& g) const override {
    for (size_t j = 0; j < objectives_.size(); ++j) f[j] = tape_.Eval(objectives_[j], x, y, u);
    for (size_t c = 0; c < constraints_.size(); ++c) g[c] = tape_.Eval(constraints_[c], x, y, u);
  }

 private:
  Tape tape_;
  std::vector<int> objectives_;
  std::vector<int> constraints_;
};

}  // namespace

std::shared_ptr<const Model> MakeExpressionModel(const nlohmann::json& objectives,
                                                 const nlohmann::json& constraints,
                                                 const ExpressionNames& names,
                                                 const std::string& path) {
  if (!objectives.is_array()) {
    throw Error(ErrorKind::kSchema, fmt::format("{}/objectives: array required", path));
  }
  if (!constraints.is_array()) {
    throw Error(ErrorKind::kSchema, fmt::format("{}/constraints: array required", path));
  }
  Tape tape;
  std::vector<int> obj, con;
  for (size_t j = 0; j < objectives.size(); ++j) {
    obj.push_back(tape.Parse(objectives[j], fmt::format("{}/objectives/{}", path, j), names));
  }
  for (size_t c = 0; c < constraints.size(); ++c) {
    con.push_back(tape.Parse(constraints[c], fmt::format("{}/constraints/{}", path, c), names));
  }
  return std::make_shared<ExpressionModel>(std::move(tape), std::move(obj), std::move(con));
}

const std::vector<std::string>& ExpressionOperators() {
  static const std::vector<std::string> ops = [] {
    std::vector<std::string> out;
    for (const auto& [name, info] : OpTable()) out.push_back(name);
    return out;
  }();
  return ops;
}

}  // namespace maro
