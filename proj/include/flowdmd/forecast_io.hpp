// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "flowdmd/dmd.hpp"

namespace flowdmd {

/// Forecast of the full state at t = 0, dt, ..., (horizon - 1) * dt.
struct Forecast {
    std::size_t rank = 0;
    double dt = 1.0;
    Date t0_label;
    PlaceIndex places;
    std::vector<double> times;
    std::vector<Date> labels;   ///< t0 + round(7 * t) days
    RealMatrix values;          ///< n x horizon
};

Forecast make_forecast(const DmdModel& model, std::size_t horizon);

/// Week label of forecast time t (t in weeks).
Date forecast_label(const Date& t0, double t);

// Forecast file layout (tab separated):
//
//   flowdmd-forecast <version>
//   rank <r>
//   dt <dt>
//   t0 <YYYY-MM-DD>
//   n <n>
//   horizon <h>
//   places <count>
//   place <id>                     count lines
//   row <t> <YYYY-MM-DD> <v_1> ... <v_n>   h lines
inline constexpr int kForecastFormatVersion = 1;

void write_forecast_file(std::ostream& out, const Forecast& forecast);
void write_forecast_file(const std::filesystem::path& path, const Forecast& forecast);
Forecast read_forecast_file(std::istream& in);
Forecast read_forecast_file(const std::filesystem::path& path);

struct PlacePair {
    std::string origin;
    std::string dest;
};

/// Parse "o:d"; an entry of the form "@i" names the i-th place (1-based).
PlacePair parse_pair(const std::string& spec);

/// Resolve a pair to 0-based indices, handling the "@i" form.
std::pair<std::size_t, std::size_t> resolve_pair(const PlacePair& pair, const PlaceIndex& places);

/// Wide table: t, week, then one column per pair holding S(o, d).
void write_pair_series(std::ostream& out, const Forecast& forecast, const std::vector<PlacePair>& pairs);

}  // namespace flowdmd
