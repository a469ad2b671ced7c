#pragma once
/// Inequality reports shared by every verification routine.

#include <string>
#include <vector>

#include "json.hpp"

namespace sobotrace {

/// Records lhs <= constant * rhs + slack.
struct InequalityReport {
  std::string id;
  double lhs = 0.0;
  double rhs = 0.0;
  double constant = 1.0;
  double slack = 0.0;
  bool pass = true;
  nlohmann::json extra = nlohmann::json::object();
};

InequalityReport make_report(std::string id, double lhs, double rhs, double constant, double slack,
                             nlohmann::json extra = nlohmann::json::object());

bool all_pass(const std::vector<InequalityReport>& reports);

nlohmann::json to_json(const InequalityReport& r);
nlohmann::json to_json(const std::vector<InequalityReport>& rs);

}  // namespace sobotrace
