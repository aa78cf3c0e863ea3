#pragma once

#include <set>
#include <string>
#include <utility>

#include "backhaul/errors.hpp"
#include "json.hpp"

namespace backhaul::detail {

/// Field-checked view over a JSON object. Every key must be consumed
/// before finish(), so unknown fields are reported by name.
class ObjectReader {
public:
  ObjectReader(const nlohmann::json& j, std::string context)
      : json_(j), context_(std::move(context)) {
    if (!json_.is_object()) {
      throw ParseError(context_ + ": expected a JSON object");
    }
  }

  bool has(const std::string& key) const { return json_.contains(key); }

  const nlohmann::json& raw(const std::string& key) {
    auto it = json_.find(key);
    if (it == json_.end()) {
      throw ParseError(context_ + ": missing field '" + key + "'");
    }
    seen_.insert(key);
    return *it;
  }

  template <typename T>
  T get(const std::string& key) {
    const auto& v = raw(key);
    try {
      return v.get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(context_ + ": field '" + key + "' has the wrong type (" + e.what() + ")");
    }
  }

  template <typename T>
  T get_or(const std::string& key, T fallback) {
    return has(key) ? get<T>(key) : fallback;
  }

  std::string path(const std::string& key) const { return context_ + "." + key; }

  void finish() const {
    for (auto it = json_.begin(); it != json_.end(); ++it) {
      if (!seen_.count(it.key())) {
        throw ParseError(context_ + ": unknown field '" + it.key() + "'");
      }
    }
  }

private:
  const nlohmann::json& json_;
  std::string context_;
  std::set<std::string> seen_;
};

}  // namespace backhaul::detail
