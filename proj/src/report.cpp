#include "sobotrace/report.hpp"

namespace sobotrace {

InequalityReport make_report(std::string id, double lhs, double rhs, double constant, double slack,
                             nlohmann::json extra) {
  InequalityReport r;
  r.id = std::move(id);
  r.lhs = lhs;
  r.rhs = rhs;
  r.constant = constant;
  r.slack = slack;
  r.pass = lhs <= constant * rhs + slack;
  r.extra = std::move(extra);
  return r;
}

bool all_pass(const std::vector<InequalityReport>& reports) {
  for (const auto& r : reports)
    if (!r.pass) return false;
  return true;
}

nlohmann::json to_json(const InequalityReport& r) {
  nlohmann::json j = {{"id", r.id},       {"lhs", r.lhs},     {"rhs", r.rhs},
                      {"constant", r.constant}, {"slack", r.slack}, {"pass", r.pass}};
  if (!r.extra.empty()) j["details"] = r.extra;
  return j;
}

nlohmann::json to_json(const std::vector<InequalityReport>& rs) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& r : rs) a.push_back(to_json(r));
  return a;
}

}  // namespace sobotrace
