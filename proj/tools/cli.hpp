#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>

namespace fusioncurve::cli {

enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitData = 3, kExitNumeric = 4 };

/// Parses and runs one subcommand (simulate, fit, select, evaluate).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// --jobs if given, else FUSIONCURVE_JOBS (`env` may be null), else logical cores.
/// Throws ConfigError on non-positive or unparsable values.
int resolve_jobs(std::optional<int> flag, const char* env);

/// Interior knots giving q close to (total observations)^(1/5) + 4.
int default_interior_knots(std::size_t total_obs, int degree);

}  // namespace fusioncurve::cli
