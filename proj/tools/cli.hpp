#pragma once
/// Command-line front end. Every command takes a JSON parameter object (validated against
/// schemas/<command>.json) and produces a JSON report, optional CSV plot data and optional
/// field files. Nothing is written unless the whole run succeeds.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "sobotrace/common.hpp"

namespace sobotrace::cli {

enum ExitStatus : int {
  kOk = 0,
  kViolation = 1,  ///< an inequality or acceptance check failed
  kInvalid = 2,    ///< schema violation, bad arguments or unreadable input
  kNumerical = 3,  ///< numerical failure or solver non-convergence
};

/// Solver did not converge; maps to kNumerical.
class ConvergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

struct FileArtifact {
  std::string path;
  std::string content;
};

struct RunOutput {
  nlohmann::json report;  ///< {"command", "seed", "parameters", "pass", "result"[, "warnings"]}
  std::string csv;        ///< empty when the command has no plot data
  std::vector<FileArtifact> files;
  bool pass = true;
};

/// Names accepted by execute(): the config commands plus "calibrate".
const std::vector<std::string>& command_names();

/// Throws InvalidArgument naming the offending location when `value` violates the schema
/// file `schema` (e.g. "seminorm.json").
void validate(const std::string& schema, const nlohmann::json& value);

/// Shipped schema text by file name; throws InvalidArgument for unknown names.
const std::string& schema_text(const std::string& name);

/// Validates and runs one command. Relative paths in `params` resolve against base_dir.
/// `log` receives progress lines (the suite prints one per criterion); may be null.
RunOutput execute(const std::string& command, const nlohmann::json& params, std::uint64_t seed,
                  const std::string& base_dir = ".", std::ostream* log = nullptr);

/// Full command-line entry point; returns the exit status.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace sobotrace::cli
