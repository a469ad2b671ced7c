#pragma once
/// JSON helpers shared by problem files and the command-line front end: typed key access
/// with uniform error messages, trigonometric field specifications and field references.

#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "sobotrace/common.hpp"
#include "sobotrace/fields.hpp"

namespace sobotrace::config {

/// j[key] as T. Throws InvalidArgument "<context>: missing key 'k'" or "... has the wrong type".
template <class T>
T get(const nlohmann::json& j, const char* key, const std::string& context) {
  if (!j.contains(key)) throw InvalidArgument(context + ": missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InvalidArgument(context + ": key '" + key + "' has the wrong type");
  }
}

template <class T>
T get_or(const nlohmann::json& j, const char* key, T fallback, const std::string& context) {
  return j.contains(key) ? get<T>(j, key, context) : fallback;
}

/// Rejects non-objects and keys outside `keys`; `what` names the object in the message.
void only_keys(const nlohmann::json& j, std::initializer_list<const char*> keys, const std::string& what,
               const std::string& context);

struct TrigMode {
  double amplitude = 1.0;
  std::vector<double> wavevector;
  double phase = 0.0;
};

/// c + Σ A cos(2π Σ k_i (x_i - lo_i) / extent_i + φ) over the given box.
struct TrigSpec {
  double constant = 0.0;
  std::vector<TrigMode> modes;
  Box box;

  double operator()(std::span<const double> x) const;
  /// Σ |A|, so the values stay within constant ± spread.
  double spread() const;
};

/// {"constant": c, "modes": [{"amplitude", "wavevector", "phase"}]}; wavevectors must have
/// one entry per box axis.
TrigSpec parse_trig(const nlohmann::json& j, const Box& box, const std::string& what, const std::string& context);

/// A field on `g`: a path to a field file (relative paths resolve against base_dir; the stored
/// grid must equal g) or a trigonometric specification sampled on g.
SampledField field_from_json(const nlohmann::json& j, const Grid& g, const std::string& base_dir,
                             const std::string& what, const std::string& context);

}  // namespace sobotrace::config
