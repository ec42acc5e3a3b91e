#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace clustergas::cli {

/// Exit codes: 0 success, 1 validation failure or violated hypothesis,
/// 2 usage or configuration error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "start:stop:count" (inclusive, evenly spaced), a comma list, or a
/// single number.
std::vector<double> parse_range(const std::string& text);

}  // namespace clustergas::cli
