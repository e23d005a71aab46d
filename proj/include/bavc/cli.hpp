#pragma once

// Command-line front end: JSON scenario configs in, CSV tables and JSON
// summaries out. Every output file carries the run manifest.

#include "bavc/errors.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace bavc::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Malformed JSON or a schema problem; the message names the file, the line
/// when known, and the field path.
class ConfigParseError : public Error {
 public:
  using Error::Error;
};

enum ExitCode : int {
  kSuccess = 0,
  kInternalError = 1,
  kConfigError = 2,
  kBudgetExceeded = 3,
  kInvariantViolation = 4,
};

/// Runs the tool; args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// %.17g, the format of every numeric CSV cell.
std::string format_double(double v);

/// FNV-1a 64-bit digest of a canonical config dump, as 16 hex digits.
std::string digest(const std::string& canonical);

}  // namespace bavc::cli
