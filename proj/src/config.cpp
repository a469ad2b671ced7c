#include "sobotrace/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

namespace sobotrace::config {

using nlohmann::json;

void only_keys(const json& j, std::initializer_list<const char*> keys, const std::string& what,
               const std::string& context) {
  if (!j.is_object()) throw InvalidArgument(context + ": " + what + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; }))
      throw InvalidArgument(context + ": unknown key '" + it.key() + "' in " + what);
}

double TrigSpec::operator()(std::span<const double> x) const {
  double v = constant;
  for (const auto& m : modes) {
    double arg = m.phase;
    for (std::size_t a = 0; a < m.wavevector.size(); ++a)
      arg += 2 * std::numbers::pi * m.wavevector[a] * (x[a] - box.lo[a]) / box.extent(static_cast<int>(a));
    v += m.amplitude * std::cos(arg);
  }
  return v;
}

double TrigSpec::spread() const {
  double s = 0.0;
  for (const auto& m : modes) s += std::abs(m.amplitude);
  return s;
}

TrigSpec parse_trig(const json& j, const Box& box, const std::string& what, const std::string& context) {
  only_keys(j, {"constant", "modes"}, what, context);
  TrigSpec t;
  t.box = box;
  t.constant = get_or<double>(j, "constant", 0.0, context);
  if (j.contains("modes")) {
    if (!j.at("modes").is_array()) throw InvalidArgument(context + ": modes of " + what + " must be an array");
    for (const auto& m : j.at("modes")) {
      only_keys(m, {"amplitude", "wavevector", "phase"}, "mode", context);
      TrigMode md{get_or<double>(m, "amplitude", 1.0, context), get<std::vector<double>>(m, "wavevector", context),
                  get_or<double>(m, "phase", 0.0, context)};
      if (static_cast<int>(md.wavevector.size()) != box.dim())
        throw InvalidArgument(context + ": wavevector length must be " + std::to_string(box.dim()) + " in " + what);
      t.modes.push_back(std::move(md));
    }
  }
  return t;
}

SampledField field_from_json(const json& j, const Grid& g, const std::string& base_dir, const std::string& what,
                             const std::string& context) {
  if (j.is_string()) {
    std::filesystem::path path = j.get<std::string>();
    if (path.is_relative()) path = std::filesystem::path(base_dir) / path;
    SampledField f = read_field_file(path.string());
    if (!(f.grid() == g)) throw InvalidArgument(context + ": field file for " + what + " has the wrong grid");
    return f;
  }
  const TrigSpec t = parse_trig(j, g.box(), what, context);
  return sample([&](std::span<const double> x) { return t(x); }, g);
}

}  // namespace sobotrace::config
