#pragma once

// Private helpers shared by the JSON readers and writers in core/src.

#include <initializer_list>
#include <string>
#include <string_view>

#include "json.hpp"
#include "reuseplan/error.hpp"

namespace reuseplan::detail {

using json = nlohmann::ordered_json;

inline json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    fail(ErrorKind::parse, std::string(what) + ": " + e.what());
  }
}

inline void reject_unknown_fields(const json& object, std::initializer_list<std::string_view> allowed,
                                  std::string_view what) {
  if (!object.is_object()) fail(ErrorKind::parse, std::string(what) + ": expected an object");
  for (const auto& [key, value] : object.items()) {
    bool known = false;
    for (auto name : allowed) known = known || key == name;
    if (!known) fail(ErrorKind::parse, std::string(what) + ": unknown field '" + key + "'");
  }
}

template <class T>
T required(const json& object, const char* field, std::string_view what) {
  if (!object.contains(field)) {
    fail(ErrorKind::parse, std::string(what) + ": missing field '" + field + "'");
  }
  try {
    return object.at(field).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorKind::parse, std::string(what) + ": field '" + field + "': " + e.what());
  }
}

template <class T>
T optional_field(const json& object, const char* field, T fallback, std::string_view what) {
  if (!object.contains(field)) return fallback;
  return required<T>(object, field, what);
}

/// Compact, key-ordered serialization used for every file we write.
inline std::string dump(const json& j) { return j.dump(1, ' ') + "\n"; }

}  // namespace reuseplan::detail
