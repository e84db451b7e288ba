#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace cauchy_im {

/// Malformed input file or flag value; the message carries file and line where known.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Newline-separated decimal reals; blank lines and lines starting with '#' are skipped.
/// Needs at least one value, and every value finite.
std::vector<double> parse_data(const std::string& text, const std::string& source = "<input>");
std::vector<double> read_data_file(const std::string& path);

/// "min:max:steps", steps >= 2 evenly spaced points including both ends.
std::vector<double> parse_grid(const std::string& spec);

enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitUsage = 2, kExitDegenerate = 3 };

/// Command-line entry point. Writes results to `out` (or the --out file) and diagnostics to `err`.
/// The default seed comes from CAUCHY_IM_SEED when set.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cauchy_im
