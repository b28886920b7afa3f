// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flowdmd::text {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

/// Strict parse of a full field (surrounding blanks allowed).
std::optional<double> parse_double(std::string_view field);

std::string_view trim(std::string_view s);

std::vector<std::string_view> split(std::string_view s, char delim);

}  // namespace flowdmd::text
