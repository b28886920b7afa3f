// SPDX-License-Identifier: Apache-2.0

#include "flowdmd/ingestion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "flowdmd/errors.hpp"
#include "flowdmd/text.hpp"

namespace flowdmd {

namespace {

// Split one delimited line, honouring double-quoted fields with "" escapes.
std::vector<std::string> split_fields(std::string_view line, char delim) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == delim) {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

std::string quote_if_needed(const std::string& field, char delim) {
    if (field.find_first_of(std::string{delim, '"', '\n', '\r'}) == std::string::npos &&
        text::trim(field) == field) {
        return field;
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::size_t require_column(const std::vector<std::string>& header, const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
        throw SchemaError("missing mapped column '" + name + "' in header");
    }
    return static_cast<std::size_t>(it - header.begin());
}

double parse_nonnegative(const std::string& field, const std::string& column, std::size_t row) {
    const auto v = text::parse_double(field);
    if (!v || !std::isfinite(*v)) {
        throw DataError("column '" + column + "': unparseable number '" + field + "'", row);
    }
    if (*v < 0.0) {
        throw DataError("column '" + column + "': negative value " + field, row);
    }
    return *v;
}

}  // namespace

std::vector<FlowRecord> parse_flow_csv(std::istream& source, const ColumnMap& columns) {
    std::string line;
    bool have_header = false;
    while (std::getline(source, line)) {
        if (!text::trim(line).empty()) {
            have_header = true;
            break;
        }
    }
    if (!have_header) throw SchemaError("input has no header row");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

    std::vector<std::string> header = split_fields(text::trim(line), columns.delimiter);
    for (auto& h : header) h = std::string(text::trim(h));

    const std::size_t c_origin = require_column(header, columns.origin);
    const std::size_t c_dest = require_column(header, columns.dest);
    const std::size_t c_date = require_column(header, columns.date_range);
    const std::size_t c_flow = require_column(header, columns.visitor_flow);
    std::optional<std::size_t> c_pop;
    std::optional<std::size_t> c_dev;
    if (columns.pop_origin) c_pop = require_column(header, *columns.pop_origin);
    if (columns.num_devices_origin) c_dev = require_column(header, *columns.num_devices_origin);

    std::vector<FlowRecord> records;
    std::size_t row = 0;
    while (std::getline(source, line)) {
        const auto trimmed = text::trim(line);
        if (trimmed.empty()) continue;
        ++row;
        const auto fields = split_fields(trimmed, columns.delimiter);
        if (fields.size() != header.size()) {
            throw DataError("expected " + std::to_string(header.size()) + " fields, found " +
                                std::to_string(fields.size()),
                            row);
        }

        FlowRecord rec;
        rec.origin_id = std::string(text::trim(fields[c_origin]));
        rec.dest_id = std::string(text::trim(fields[c_dest]));
        if (rec.origin_id.empty() || rec.dest_id.empty()) {
            throw DataError("empty place identifier", row);
        }
        const auto start = Date::parse_range_start(fields[c_date]);
        if (!start) {
            throw DataError("column '" + columns.date_range + "': unparseable date '" +
                                fields[c_date] + "'",
                            row);
        }
        rec.week_start = *start;
        rec.visitor_flow = parse_nonnegative(fields[c_flow], columns.visitor_flow, row);
        if (c_pop && !text::trim(fields[*c_pop]).empty()) {
            rec.pop_origin = parse_nonnegative(fields[*c_pop], *columns.pop_origin, row);
        }
        if (c_dev && !text::trim(fields[*c_dev]).empty()) {
            rec.num_devices_origin = parse_nonnegative(fields[*c_dev], *columns.num_devices_origin, row);
        }
        if (rec.pop_origin && !rec.num_devices_origin) {
            throw DataError("population present without a device count", row);
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<FlowRecord> parse_flow_file(const std::filesystem::path& path, const ColumnMap& columns) {
    std::ifstream in(path);
    if (!in) throw ArgumentError(path.string() + ": cannot open for reading");
    try {
        return parse_flow_csv(in, columns);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what(), e.row());
    } catch (const SchemaError& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
}

void write_flow_csv(std::ostream& out, std::span<const FlowRecord> records, const ColumnMap& columns) {
    const char d = columns.delimiter;
    out << quote_if_needed(columns.origin, d) << d << quote_if_needed(columns.dest, d) << d
        << quote_if_needed(columns.date_range, d) << d << quote_if_needed(columns.visitor_flow, d);
    if (columns.pop_origin) out << d << quote_if_needed(*columns.pop_origin, d);
    if (columns.num_devices_origin) out << d << quote_if_needed(*columns.num_devices_origin, d);
    out << '\n';
    for (const auto& r : records) {
        out << quote_if_needed(r.origin_id, d) << d << quote_if_needed(r.dest_id, d) << d
            << r.week_start.iso() << " - " << r.week_start.plus_days(6).iso() << d
            << text::format_double(r.visitor_flow);
        if (columns.pop_origin) {
            out << d;
            if (r.pop_origin) out << text::format_double(*r.pop_origin);
        }
        if (columns.num_devices_origin) {
            out << d;
            if (r.num_devices_origin) out << text::format_double(*r.num_devices_origin);
        }
        out << '\n';
    }
}

double infer_pop_flow(const FlowRecord& record) {
    if (!record.pop_origin || !record.num_devices_origin) {
        throw DivisionGuardError("population flow for " + record.origin_id + "->" + record.dest_id +
                                 " needs both pop(o) and num_devices(o)");
    }
    if (!(*record.num_devices_origin > 0.0)) {
        throw DivisionGuardError("population flow for " + record.origin_id + "->" + record.dest_id +
                                 ": num_devices(o) is zero");
    }
    return record.visitor_flow * (*record.pop_origin / *record.num_devices_origin);
}

PlaceIndex::PlaceIndex(std::vector<std::string> ids) : ids_(std::move(ids)) {
    std::sort(ids_.begin(), ids_.end());
    ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
    lookup_.reserve(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) lookup_.emplace(ids_[i], i);
}

PlaceIndex PlaceIndex::from_records(std::span<const FlowRecord> records) {
    std::set<std::string> ids;
    for (const auto& r : records) {
        ids.insert(r.origin_id);
        ids.insert(r.dest_id);
    }
    return PlaceIndex(std::vector<std::string>(ids.begin(), ids.end()));
}

std::size_t PlaceIndex::index_of(const std::string& id) const {
    const auto it = lookup_.find(id);
    if (it == lookup_.end()) throw MappingError("unknown place id '" + id + "'");
    return it->second;
}

OdMatrix build_od_matrix(std::span<const FlowRecord> records, const PlaceIndex& index,
                         FlowQuantity quantity) {
    const auto k = static_cast<Eigen::Index>(index.size());
    OdMatrix out;
    out.entries = RealMatrix::Zero(k, k);
    if (!records.empty()) out.week_start = records.front().week_start;
    for (const auto& r : records) {
        if (r.week_start != out.week_start) {
            throw ArgumentError("build_od_matrix: records span weeks " + out.week_start.iso() +
                                " and " + r.week_start.iso());
        }
        const auto i = static_cast<Eigen::Index>(index.index_of(r.origin_id));
        const auto j = static_cast<Eigen::Index>(index.index_of(r.dest_id));
        out.entries(i, j) += quantity == FlowQuantity::population ? infer_pop_flow(r) : r.visitor_flow;
    }
    return out;
}

OdMatrix symmetrize(const OdMatrix& a) {
    if (a.entries.rows() != a.entries.cols()) {
        throw ShapeError("symmetrize: O-D matrix is not square");
    }
    if (!a.entries.allFinite()) {
        throw IngestionDefectError("symmetrize: O-D matrix contains non-finite entries");
    }
    OdMatrix s = a;
    const auto k = a.entries.rows();
    for (Eigen::Index j = 0; j < k; ++j) {
        for (Eigen::Index i = 0; i < k; ++i) {
            s.entries(i, j) = 0.5 * (a.entries(i, j) + a.entries(j, i));
        }
    }
    return s;
}

SnapshotMatrix::SnapshotMatrix(PlaceIndex places, std::vector<Date> weeks, RealMatrix data)
    : places_(std::move(places)), weeks_(std::move(weeks)), data_(std::move(data)) {
    const auto k = places_.size();
    if (static_cast<std::size_t>(data_.rows()) != k * k) {
        throw ShapeError("snapshot rows " + std::to_string(data_.rows()) + " != k^2 = " +
                         std::to_string(k * k));
    }
    if (static_cast<std::size_t>(data_.cols()) != weeks_.size()) {
        throw ShapeError("snapshot columns " + std::to_string(data_.cols()) + " != week labels " +
                         std::to_string(weeks_.size()));
    }
}

RealVector SnapshotMatrix::pair_series(std::size_t origin, std::size_t dest) const {
    return data_.row(static_cast<Eigen::Index>(row_of(origin, dest))).transpose();
}

RealMatrix SnapshotMatrix::unvec(std::size_t t) const {
    const auto k = static_cast<Eigen::Index>(this->k());
    return data_.col(static_cast<Eigen::Index>(t)).reshaped(k, k);
}

SnapshotMatrix SnapshotMatrix::slice(std::size_t first, std::size_t last) const {
    if (first > last || last >= m()) {
        throw ArgumentError("week slice [" + std::to_string(first) + ", " + std::to_string(last) +
                            "] outside 0.." + std::to_string(m() == 0 ? 0 : m() - 1));
    }
    const auto count = static_cast<Eigen::Index>(last - first + 1);
    return SnapshotMatrix(places_,
                          std::vector<Date>(weeks_.begin() + static_cast<std::ptrdiff_t>(first),
                                            weeks_.begin() + static_cast<std::ptrdiff_t>(last + 1)),
                          data_.middleCols(static_cast<Eigen::Index>(first), count));
}

std::optional<std::size_t> SnapshotMatrix::find_week(const Date& week) const {
    const auto it = std::lower_bound(weeks_.begin(), weeks_.end(), week);
    if (it == weeks_.end() || *it != week) return std::nullopt;
    return static_cast<std::size_t>(it - weeks_.begin());
}

SnapshotMatrix build_snapshot_matrix(std::span<const OdMatrix> weeks, const PlaceIndex& index) {
    const std::size_t k = index.size();
    const auto n = static_cast<Eigen::Index>(k * k);
    RealMatrix data(n, static_cast<Eigen::Index>(weeks.size()));
    std::vector<Date> labels;
    labels.reserve(weeks.size());
    for (std::size_t t = 0; t < weeks.size(); ++t) {
        const auto& w = weeks[t];
        if (w.entries.rows() != w.entries.cols() || w.k() != k) {
            throw ShapeError("week " + w.week_start.iso() + " has a " + std::to_string(w.entries.rows()) +
                             "x" + std::to_string(w.entries.cols()) + " matrix, expected " +
                             std::to_string(k) + "x" + std::to_string(k));
        }
        if (t > 0 && !(labels.back() < w.week_start)) {
            throw OrderingError("week " + w.week_start.iso() + " does not follow " + labels.back().iso());
        }
        labels.push_back(w.week_start);
        data.col(static_cast<Eigen::Index>(t)) = symmetrize(w).entries.reshaped();
    }
    return SnapshotMatrix(index, std::move(labels), std::move(data));
}

SnapshotMatrix assemble_snapshots(std::span<const FlowRecord> records, FlowQuantity quantity) {
    const PlaceIndex index = PlaceIndex::from_records(records);
    std::map<Date, std::vector<FlowRecord>> by_week;
    for (const auto& r : records) by_week[r.week_start].push_back(r);

    std::vector<OdMatrix> weeks;
    weeks.reserve(by_week.size());
    std::size_t ordinal = 0;
    for (const auto& [start, recs] : by_week) {
        OdMatrix od = build_od_matrix(recs, index, quantity);
        od.week_index = ordinal++;
        od.week_start = start;
        weeks.push_back(std::move(od));
    }
    return build_snapshot_matrix(weeks, index);
}

}  // namespace flowdmd
