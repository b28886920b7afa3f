// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "flowdmd/date.hpp"
#include "flowdmd/linalg.hpp"

namespace flowdmd {

/// One origin-destination observation for one week.
struct FlowRecord {
    std::string origin_id;
    std::string dest_id;
    Date week_start;
    double visitor_flow = 0.0;
    std::optional<double> pop_origin;
    std::optional<double> num_devices_origin;

    friend bool operator==(const FlowRecord&, const FlowRecord&) = default;
};

/// Header names of the columns the parser reads. Defaults follow the
/// nine-column weekly flow layout
/// (geoid_o, geoid_d, lng_o, lat_o, lng_d, lat_d, date_range, visitor_flows, pop_flows).
struct ColumnMap {
    std::string origin = "geoid_o";
    std::string dest = "geoid_d";
    std::string date_range = "date_range";
    std::string visitor_flow = "visitor_flows";
    std::optional<std::string> pop_origin;
    std::optional<std::string> num_devices_origin;
    char delimiter = ',';
};

/// Which quantity fills the O-D matrices.
enum class FlowQuantity {
    visitor,     ///< raw visitor_flow
    population,  ///< visitor_flow * pop(o) / num_devices(o)
};

/// Parse delimited text with a header row. Throws SchemaError when a mapped
/// column is missing and DataError (carrying the data-row number) on the first
/// bad row; no partial result is returned.
std::vector<FlowRecord> parse_flow_csv(std::istream& source, const ColumnMap& columns);

/// As above, reading from a file; error messages are prefixed with the path.
std::vector<FlowRecord> parse_flow_file(const std::filesystem::path& path, const ColumnMap& columns);

/// Emit records in a layout parse_flow_csv reads back identically under `columns`.
void write_flow_csv(std::ostream& out, std::span<const FlowRecord> records, const ColumnMap& columns);

/// visitor_flow * pop_origin / num_devices_origin.
double infer_pop_flow(const FlowRecord& record);

/// Bijection between place identifiers and contiguous 0-based matrix indices,
/// ordered lexicographically by identifier.
class PlaceIndex {
public:
    PlaceIndex() = default;
    explicit PlaceIndex(std::vector<std::string> ids);

    static PlaceIndex from_records(std::span<const FlowRecord> records);

    std::size_t size() const { return ids_.size(); }
    const std::vector<std::string>& ids() const { return ids_; }
    const std::string& id_at(std::size_t index) const { return ids_.at(index); }

    /// Throws MappingError naming the id when it is unknown.
    std::size_t index_of(const std::string& id) const;
    bool contains(const std::string& id) const { return lookup_.contains(id); }

    friend bool operator==(const PlaceIndex& a, const PlaceIndex& b) { return a.ids_ == b.ids_; }

private:
    std::vector<std::string> ids_;
    std::unordered_map<std::string, std::size_t> lookup_;
};

/// k x k weekly flow matrix; entry (i, j) is flow from place i to place j.
struct OdMatrix {
    std::size_t week_index = 0;
    Date week_start;
    RealMatrix entries;

    std::size_t k() const { return static_cast<std::size_t>(entries.rows()); }
};

/// Sum flows of one week's records into an O-D matrix. Absent pairs are zero.
OdMatrix build_od_matrix(std::span<const FlowRecord> records, const PlaceIndex& index,
                         FlowQuantity quantity = FlowQuantity::visitor);

/// (A + A^T) / 2, exactly symmetric.
OdMatrix symmetrize(const OdMatrix& a);

/// The k^2 x m data matrix whose columns are column-major vectorized
/// symmetric weekly O-D matrices.
class SnapshotMatrix {
public:
    SnapshotMatrix() = default;
    SnapshotMatrix(PlaceIndex places, std::vector<Date> weeks, RealMatrix data);

    std::size_t k() const { return places_.size(); }
    std::size_t m() const { return weeks_.size(); }
    std::size_t n() const { return static_cast<std::size_t>(data_.rows()); }

    const PlaceIndex& places() const { return places_; }
    const std::vector<Date>& weeks() const { return weeks_; }
    const RealMatrix& data() const { return data_; }

    /// Row of entry (origin, dest) in a vectorized column.
    std::size_t row_of(std::size_t origin, std::size_t dest) const { return origin + dest * k(); }

    /// S^t(origin, dest) for every week.
    RealVector pair_series(std::size_t origin, std::size_t dest) const;

    /// Un-vectorize column t back into a k x k matrix.
    RealMatrix unvec(std::size_t t) const;

    /// Columns first..last (0-based, inclusive).
    SnapshotMatrix slice(std::size_t first, std::size_t last) const;

    /// 0-based position of a week label, if present.
    std::optional<std::size_t> find_week(const Date& week) const;

private:
    PlaceIndex places_;
    std::vector<Date> weeks_;
    RealMatrix data_;
};

/// Column t is vec(symmetrize(weeks[t])). Throws ShapeError on mixed k and
/// OrderingError on duplicate or out-of-order weeks.
SnapshotMatrix build_snapshot_matrix(std::span<const OdMatrix> weeks, const PlaceIndex& index);

/// Group records by week start, build every weekly O-D matrix and stack them.
SnapshotMatrix assemble_snapshots(std::span<const FlowRecord> records,
                                  FlowQuantity quantity = FlowQuantity::visitor);

}  // namespace flowdmd
