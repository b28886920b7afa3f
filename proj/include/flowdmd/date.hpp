// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace flowdmd {

/// Calendar date used to label weekly snapshots.
class Date {
public:
    Date() = default;
    explicit Date(std::chrono::sys_days days) : days_(days) {}

    /// Accepts YYYY-MM-DD, MM/DD/YYYY and MM/DD/YY (two-digit years map to 20YY).
    static std::optional<Date> parse(std::string_view text);

    /// Start date of a range field such as "2019-01-07 - 2019-01-13" or
    /// "01/07/19 - 01/13/19". A bare date is its own start.
    static std::optional<Date> parse_range_start(std::string_view text);

    std::string iso() const;
    std::chrono::sys_days days() const { return days_; }
    Date plus_days(long n) const { return Date(days_ + std::chrono::days{n}); }

    friend auto operator<=>(const Date&, const Date&) = default;

private:
    std::chrono::sys_days days_{};
};

/// Signed difference a - b in days.
long days_between(const Date& a, const Date& b);

}  // namespace flowdmd
