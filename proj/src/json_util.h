#ifndef MARO_SRC_JSON_UTIL_H_
#define MARO_SRC_JSON_UTIL_H_

// Checked accessors for hand-written and stored JSON; every failure is a
// kSchema error whose message starts with the JSON pointer of the field.

#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "maro/error.h"

namespace maro::json_util {

using Json = nlohmann::json;

[[noreturn]] inline void Fail(const std::string& path, const std::string& message) {
  throw Error(ErrorKind::kSchema, fmt::format("{}: {}", path.empty() ? "/" : path, message));
}

inline const Json& Field(const Json& j, const std::string& path, const char* key) {
  if (!j.is_object()) Fail(path, "object expected");
  const auto it = j.find(key);
  if (it == j.end()) Fail(path + "/" + key, "required field missing");
  return *it;
}

inline std::string String(const Json& j, const std::string& path) {
  if (!j.is_string()) Fail(path, "string expected");
  return j.get<std::string>();
}

inline long Int(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) Fail(path, "integer expected");
  return j.get<long>();
}

inline bool Bool(const Json& j, const std::string& path) {
  if (!j.is_boolean()) Fail(path, "boolean expected");
  return j.get<bool>();
}

inline std::vector<int> IntArray(const Json& j, const std::string& path) {
  if (!j.is_array()) Fail(path, "array of integers expected");
  std::vector<int> out;
  for (size_t i = 0; i < j.size(); ++i) {
    out.push_back(static_cast<int>(Int(j[i], fmt::format("{}/{}", path, i))));
  }
  return out;
}

}  // namespace maro::json_util

#endif  // MARO_SRC_JSON_UTIL_H_
