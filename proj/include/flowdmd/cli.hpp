// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "flowdmd/evaluation.hpp"

namespace flowdmd::cli {

/// Entry point behind the `flowdmd` executable. Data goes to files or `out`,
/// diagnostics to `err`. Returns the process exit code (0 iff no error).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Convenience overload for tests: args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parse "A:B" where each end is a 1-based week number or an ISO date; a date
/// selects the week whose 7-day window contains it.
WeekRange parse_week_range(const std::string& spec, const std::vector<Date>& weeks);

/// Parse "r[,r...]" into positive ranks.
std::vector<std::size_t> parse_ranks(const std::string& spec);

}  // namespace flowdmd::cli
