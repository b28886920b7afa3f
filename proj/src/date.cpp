// SPDX-License-Identifier: Apache-2.0

#include "flowdmd/date.hpp"

#include <charconv>
#include <cstdio>

namespace flowdmd {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '"')) s.remove_suffix(1);
    return s;
}

bool parse_int(std::string_view s, int& out) {
    if (s.empty()) return false;
    for (char c : s) {
        if (c < '0' || c > '9') return false;
    }
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

std::optional<Date> make(int y, int m, int d) {
    using namespace std::chrono;
    if (m < 1 || m > 12 || d < 1 || d > 31) return std::nullopt;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    return Date(sys_days{ymd});
}

}  // namespace

std::optional<Date> Date::parse(std::string_view text) {
    text = trim(text);
    int y = 0, m = 0, d = 0;
    if (text.size() == 10 && text[4] == '-' && text[7] == '-') {
        if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), m) ||
            !parse_int(text.substr(8, 2), d)) {
            return std::nullopt;
        }
        return make(y, m, d);
    }
    const auto s1 = text.find('/');
    const auto s2 = s1 == std::string_view::npos ? s1 : text.find('/', s1 + 1);
    if (s2 == std::string_view::npos) return std::nullopt;
    const auto ys = text.substr(s2 + 1);
    if (!parse_int(text.substr(0, s1), m) || !parse_int(text.substr(s1 + 1, s2 - s1 - 1), d) ||
        !parse_int(ys, y)) {
        return std::nullopt;
    }
    if (ys.size() == 2) {
        y += 2000;
    } else if (ys.size() != 4) {
        return std::nullopt;
    }
    return make(y, m, d);
}

std::optional<Date> Date::parse_range_start(std::string_view text) {
    text = trim(text);
    // ISO dates contain '-', so split only on a spaced separator or on '-'
    // that follows a slash-style date.
    auto sep = text.find(" - ");
    if (sep == std::string_view::npos && text.find('/') != std::string_view::npos) {
        sep = text.find('-');
    }
    if (sep != std::string_view::npos) text = text.substr(0, sep);
    return parse(text);
}

std::string Date::iso() const {
    const std::chrono::year_month_day ymd{days_};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

long days_between(const Date& a, const Date& b) { return (a.days() - b.days()).count(); }

}  // namespace flowdmd
