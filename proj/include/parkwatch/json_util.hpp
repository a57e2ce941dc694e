#pragma once

// Strict JSON object reading: every error names the JSON pointer of the
// offending value, and keys that were never read are rejected.

#include <cmath>
#include <set>
#include <string>
#include <type_traits>

#include "json.hpp"
#include "parkwatch/core.hpp"

namespace parkwatch {

class JsonObject {
 public:
  JsonObject(const nlohmann::json& j, std::string path)
      : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  [[noreturn]] static void fail(const std::string& path,
                                const std::string& what) {
    throw ConfigError((path.empty() ? std::string("/") : path) + ": " + what);
  }

  std::string child_path(const std::string& key) const {
    return path_ + "/" + key;
  }
  const std::string& path() const noexcept { return path_; }

  bool has(const std::string& key) const { return j_.contains(key); }

  const nlohmann::json& raw(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) fail(child_path(key), "missing required key");
    return j_.at(key);
  }

  JsonObject object(const std::string& key) {
    return JsonObject(raw(key), child_path(key));
  }

  template <typename T>
  T get(const std::string& key) {
    return convert<T>(raw(key), child_path(key));
  }

  template <typename T>
  T get_or(const std::string& key, T fallback) {
    seen_.insert(key);
    if (!j_.contains(key)) return fallback;
    return convert<T>(j_.at(key), child_path(key));
  }

  /// Throws for the first key in the object that no accessor touched.
  void reject_unknown() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.contains(it.key())) fail(child_path(it.key()), "unknown key");
  }

  template <typename T>
  static T convert(const nlohmann::json& v, const std::string& path) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) fail(path, "expected a boolean");
      return v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (v.is_number_integer()) return v.get<T>();
      if (v.is_number_float()) {
        const double d = v.get<double>();
        if (std::floor(d) == d) return static_cast<T>(d);
      }
      fail(path, "expected an integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) fail(path, "expected a number");
      const double d = v.get<double>();
      if (!std::isfinite(d)) fail(path, "expected a finite number");
      return static_cast<T>(d);
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) fail(path, "expected a string");
      return v.get<std::string>();
    } else {
      static_assert(sizeof(T) == 0, "unsupported JsonObject conversion");
    }
  }

 private:
  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline Rect parse_rect(const nlohmann::json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 4)
    JsonObject::fail(path, "expected [x, y, w, h]");
  return {JsonObject::convert<int>(v[0], path + "/0"),
          JsonObject::convert<int>(v[1], path + "/1"),
          JsonObject::convert<int>(v[2], path + "/2"),
          JsonObject::convert<int>(v[3], path + "/3")};
}

}  // namespace parkwatch
