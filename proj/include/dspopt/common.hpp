#pragma once

#include <cstdio>
#include <initializer_list>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace dspopt {

using json = nlohmann::json;

/// Raised when input data (files, configs, call arguments) violates a contract.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when an internal invariant breaks; indicates a bug, not bad input.
struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

// Shortest-round-trip-ish decimal rendering for CSV output. "%.17g" always
// reproduces the exact double on re-parse and is byte-stable across runs.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

// Strict object schema check: every listed key must be present and no other
// key may appear.
inline void require_keys(const json& obj, std::initializer_list<const char*> keys,
                         const std::string& where) {
  if (!obj.is_object()) {
    throw InputError(where + ": expected a JSON object");
  }
  for (const char* key : keys) {
    if (!obj.contains(key)) {
      throw InputError(where + ": missing key \"" + key + "\"");
    }
  }
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : keys) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw InputError(where + ": unknown key \"" + item.key() + "\"");
    }
  }
}

}  // namespace dspopt
