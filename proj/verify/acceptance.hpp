#pragma once
/// The acceptance battery: one entry per criterion, each built from sub-checks at fixed
/// tolerances. Shared by the acceptance binary and the `suite` command.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace sobotrace::verify {

struct SubCheck {
  std::string name;
  bool pass = true;
  std::string detail;
  /// Set when the sub-check is documented as unattainable; its failure is then expected.
  std::string known_deviation;
};

enum class CriterionStatus {
  Pass,
  Fail,            ///< a sub-check failed that is not a documented deviation
  KnownFail,       ///< only documented deviations failed
  UnexpectedPass,  ///< a documented deviation passed; the record is stale
};

std::string to_string(CriterionStatus s);

struct CriterionOutcome {
  int id = 0;
  std::string title;
  std::vector<SubCheck> checks;
  double seconds = 0.0;  ///< wall time; kept out of to_json
  nlohmann::json data = nlohmann::json::object();

  CriterionStatus status() const;
  /// "criterion <id> <STATUS> <title>: <sub-check details> [<seconds> s]"
  std::string summary_line() const;
  nlohmann::json to_json() const;
};

constexpr int kCriterionCount = 10;

/// Runs the selected criteria (all when `ids` is empty) in increasing order. Randomized
/// inputs derive from `seed` and the criterion id. `progress` is called after each criterion.
std::vector<CriterionOutcome> run_acceptance(std::uint64_t seed, const std::vector<int>& ids = {},
                                             const std::function<void(const CriterionOutcome&)>& progress = {});

/// True when no criterion has status Fail or UnexpectedPass.
bool acceptance_ok(const std::vector<CriterionOutcome>& outcomes);

}  // namespace sobotrace::verify
