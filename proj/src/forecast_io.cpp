// SPDX-License-Identifier: Apache-2.0

#include "flowdmd/forecast_io.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "flowdmd/errors.hpp"
#include "flowdmd/text.hpp"

namespace flowdmd {

namespace {

std::vector<std::string_view> expect_line(std::istream& in, std::string& buf, std::string_view key) {
    if (!std::getline(in, buf)) {
        throw FormatError("forecast file truncated before '" + std::string(key) + "'");
    }
    if (!buf.empty() && buf.back() == '\r') buf.pop_back();
    auto f = text::split(buf, '\t');
    if (f[0] != key) {
        throw FormatError("forecast file: expected '" + std::string(key) + "', found '" + std::string(f[0]) + "'");
    }
    return f;
}

double expect_number(std::istream& in, std::string& buf, std::string_view key) {
    auto f = expect_line(in, buf, key);
    const auto v = f.size() == 2 ? text::parse_double(f[1]) : std::nullopt;
    if (!v) throw FormatError("forecast file: bad value for '" + std::string(key) + "'");
    return *v;
}

std::size_t expect_count(std::istream& in, std::string& buf, std::string_view key) {
    const double v = expect_number(in, buf, key);
    if (v < 0.0 || v != std::floor(v)) throw FormatError("forecast file: bad count for '" + std::string(key) + "'");
    return static_cast<std::size_t>(v);
}

std::size_t resolve_one(const std::string& token, const PlaceIndex& places) {
    if (!token.empty() && token.front() == '@') {
        const auto v = text::parse_double(std::string_view(token).substr(1));
        if (!v || *v < 1.0 || *v != std::floor(*v) || *v > static_cast<double>(places.size())) {
            throw MappingError("place ordinal '" + token + "' outside 1.." + std::to_string(places.size()));
        }
        return static_cast<std::size_t>(*v) - 1;
    }
    return places.index_of(token);
}

}  // namespace

Date forecast_label(const Date& t0, double t) { return t0.plus_days(std::lround(7.0 * t)); }

Forecast make_forecast(const DmdModel& model, std::size_t horizon) {
    Forecast f;
    f.rank = model.r;
    f.dt = model.dt;
    f.t0_label = model.t0_label;
    f.places = model.places;
    f.values = reconstruct(model, horizon);
    for (std::size_t j = 0; j < horizon; ++j) {
        const double t = static_cast<double>(j) * model.dt;
        f.times.push_back(t);
        f.labels.push_back(forecast_label(model.t0_label, t));
    }
    return f;
}

void write_forecast_file(std::ostream& out, const Forecast& f) {
    out << "flowdmd-forecast\t" << kForecastFormatVersion << '\n'
        << "rank\t" << f.rank << '\n'
        << "dt\t" << text::format_double(f.dt) << '\n'
        << "t0\t" << f.t0_label.iso() << '\n'
        << "n\t" << f.values.rows() << '\n'
        << "horizon\t" << f.values.cols() << '\n'
        << "places\t" << f.places.size() << '\n';
    for (const auto& id : f.places.ids()) out << "place\t" << id << '\n';
    for (Eigen::Index j = 0; j < f.values.cols(); ++j) {
        out << "row\t" << text::format_double(f.times[static_cast<std::size_t>(j)]) << '\t'
            << f.labels[static_cast<std::size_t>(j)].iso();
        for (Eigen::Index i = 0; i < f.values.rows(); ++i) out << '\t' << text::format_double(f.values(i, j));
        out << '\n';
    }
}

void write_forecast_file(const std::filesystem::path& path, const Forecast& forecast) {
    std::ofstream out(path);
    if (!out) throw ArgumentError(path.string() + ": cannot open for writing");
    write_forecast_file(out, forecast);
}

Forecast read_forecast_file(std::istream& in) {
    std::string buf;
    Forecast f;
    if (expect_count(in, buf, "flowdmd-forecast") != static_cast<std::size_t>(kForecastFormatVersion)) {
        throw FormatError("forecast file: unsupported version");
    }
    f.rank = expect_count(in, buf, "rank");
    f.dt = expect_number(in, buf, "dt");
    {
        auto line = expect_line(in, buf, "t0");
        const auto d = line.size() == 2 ? Date::parse(line[1]) : std::nullopt;
        if (!d) throw FormatError("forecast file: bad t0");
        f.t0_label = *d;
    }
    const std::size_t n = expect_count(in, buf, "n");
    const std::size_t h = expect_count(in, buf, "horizon");
    const std::size_t count = expect_count(in, buf, "places");
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < count; ++i) {
        auto line = expect_line(in, buf, "place");
        if (line.size() != 2) throw FormatError("forecast file: malformed place line");
        ids.emplace_back(line[1]);
    }
    f.places = PlaceIndex(ids);
    if (f.places.ids() != ids) throw FormatError("forecast file: place list not sorted and distinct");

    f.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(h));
    for (std::size_t j = 0; j < h; ++j) {
        auto line = expect_line(in, buf, "row");
        if (line.size() != n + 3) {
            throw FormatError("forecast file: row " + std::to_string(j + 1) + " has " +
                              std::to_string(line.size() < 3 ? 0 : line.size() - 3) + " values, expected " +
                              std::to_string(n));
        }
        const auto t = text::parse_double(line[1]);
        const auto d = Date::parse(line[2]);
        if (!t || !d) throw FormatError("forecast file: bad row header in row " + std::to_string(j + 1));
        f.times.push_back(*t);
        f.labels.push_back(*d);
        for (std::size_t i = 0; i < n; ++i) {
            const auto v = text::parse_double(line[i + 3]);
            if (!v) throw FormatError("forecast file: bad value in row " + std::to_string(j + 1));
            f.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = *v;
        }
    }
    return f;
}

Forecast read_forecast_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError(path.string() + ": cannot open for reading");
    try {
        return read_forecast_file(in);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

PlacePair parse_pair(const std::string& spec) {
    const auto colon = spec.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == spec.size()) {
        throw ArgumentError("pair '" + spec + "' is not of the form origin:dest");
    }
    return {spec.substr(0, colon), spec.substr(colon + 1)};
}

std::pair<std::size_t, std::size_t> resolve_pair(const PlacePair& pair, const PlaceIndex& places) {
    return {resolve_one(pair.origin, places), resolve_one(pair.dest, places)};
}

void write_pair_series(std::ostream& out, const Forecast& f, const std::vector<PlacePair>& pairs) {
    const std::size_t k = f.places.size();
    std::vector<Eigen::Index> rows;
    out << "t\tweek";
    for (const auto& p : pairs) {
        const auto [i, j] = resolve_pair(p, f.places);
        rows.push_back(static_cast<Eigen::Index>(i + j * k));
        out << '\t' << f.places.id_at(i) << ':' << f.places.id_at(j);
    }
    out << '\n';
    for (Eigen::Index c = 0; c < f.values.cols(); ++c) {
        out << text::format_double(f.times[static_cast<std::size_t>(c)]) << '\t'
            << f.labels[static_cast<std::size_t>(c)].iso();
        for (auto r : rows) out << '\t' << text::format_double(f.values(r, c));
        out << '\n';
    }
}

}  // namespace flowdmd
