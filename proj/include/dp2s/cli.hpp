#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace dp2s::cli {

enum ExitCode : int { kSuccess = 0, kUsageError = 1, kRuntimeError = 2 };

/// One real per line; blank lines and lines starting with '#' are skipped.
/// Throws std::runtime_error naming `source` and the line number on an
/// unparseable or non-finite value, and on an empty sample.
std::vector<double> parse_samples(std::istream& in, const std::string& source);

/// parse_samples on a file; std::runtime_error if it cannot be opened.
std::vector<double> parse_sample_file(const std::string& path);

/// Entry point of the dp2s command. Reports go to `out` (or --out), messages
/// to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dp2s::cli
