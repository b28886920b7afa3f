// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "flowdmd/errors.hpp"
#include "flowdmd/ingestion.hpp"
#include "flowdmd/snapshot_io.hpp"

using namespace flowdmd;

namespace {

ColumnMap five_column_map() {
    ColumnMap c;
    c.origin = "origin";
    c.dest = "dest";
    c.date_range = "start";
    c.visitor_flow = "flow";
    return c;
}

Date day(const char* iso) { return *Date::parse(iso); }

FlowRecord rec(const char* o, const char* d, const char* week, double flow) {
    FlowRecord r;
    r.origin_id = o;
    r.dest_id = d;
    r.week_start = day(week);
    r.visitor_flow = flow;
    return r;
}

RealMatrix random_od(std::mt19937_64& rng, Eigen::Index k) {
    std::uniform_real_distribution<double> u(0.0, 1e6);
    RealMatrix m(k, k);
    for (Eigen::Index j = 0; j < k; ++j) {
        for (Eigen::Index i = 0; i < k; ++i) m(i, j) = u(rng);
    }
    return m;
}

}  // namespace

TEST_CASE("dates parse in ISO and US slash forms") {
    CHECK(Date::parse("2019-01-07")->iso() == "2019-01-07");
    CHECK(Date::parse("01/07/19")->iso() == "2019-01-07");
    CHECK(Date::parse("01/07/2019")->iso() == "2019-01-07");
    CHECK(Date::parse_range_start("2019-01-07 - 2019-01-13")->iso() == "2019-01-07");
    CHECK(Date::parse_range_start("01/07/19 - 01/13/19")->iso() == "2019-01-07");
    CHECK_FALSE(Date::parse("2019-02-30"));
    CHECK_FALSE(Date::parse("yesterday"));
    CHECK(days_between(day("2020-03-09"), day("2019-01-07")) == 427);
}

TEST_CASE("parse_flow_csv maps fields by header name") {
    std::istringstream in("origin,dest,start,end,flow\n01,02,2019-01-07,2019-01-13,1500\n");
    const auto records = parse_flow_csv(in, five_column_map());
    REQUIRE(records.size() == 1);
    CHECK(records[0] == rec("01", "02", "2019-01-07", 1500.0));
}

TEST_CASE("parse_flow_csv on a header-only file yields no records") {
    std::istringstream in("origin,dest,start,end,flow\n");
    CHECK(parse_flow_csv(in, five_column_map()).empty());
}

TEST_CASE("parse_flow_csv reads the nine-column weekly layout by default") {
    std::istringstream in(
        "geoid_o,geoid_d,lng_o,lat_o,lng_d,lat_d,date_range,visitor_flows,pop_flows\n"
        "01,02,-86.8,32.8,-152.2,64.2,01/07/19 - 01/13/19,812,41234.5\n"
        "\"02\",01,-152.2,64.2,-86.8,32.8,\"01/07/19 - 01/13/19\",77,1022.1\n");
    const auto records = parse_flow_csv(in, ColumnMap{});
    REQUIRE(records.size() == 2);
    CHECK(records[1].origin_id == "02");
    CHECK(records[1].week_start == day("2019-01-07"));
    CHECK(records[0].visitor_flow == 812.0);
}

TEST_CASE("parse_flow_csv rejects a negative flow with its row number and keeps nothing") {
    std::string csv = "origin,dest,start,end,flow\n";
    for (int i = 1; i <= 10; ++i) {
        csv += "A,B,2019-01-07,2019-01-13," + std::string(i == 7 ? "-3" : std::to_string(i * 10)) + "\n";
    }
    std::istringstream in(csv);
    std::vector<FlowRecord> out{rec("sentinel", "x", "2019-01-07", 1)};
    try {
        out = parse_flow_csv(in, five_column_map());
        FAIL("expected a DataError");
    } catch (const DataError& e) {
        CHECK(e.row() == 7);
        CHECK(std::string(e.what()).find("row 7") != std::string::npos);
    }
    CHECK(out.size() == 1);  // untouched
}

TEST_CASE("parse_flow_csv error paths") {
    SUBCASE("missing mapped column") {
        std::istringstream in("origin,dest,start,end\n");
        CHECK_THROWS_AS(parse_flow_csv(in, five_column_map()), SchemaError);
    }
    SUBCASE("no header at all") {
        std::istringstream in("");
        CHECK_THROWS_AS(parse_flow_csv(in, five_column_map()), SchemaError);
    }
    SUBCASE("unparseable number") {
        std::istringstream in("origin,dest,start,end,flow\nA,B,2019-01-07,2019-01-13,12x\n");
        CHECK_THROWS_AS(parse_flow_csv(in, five_column_map()), DataError);
    }
    SUBCASE("bad date") {
        std::istringstream in("origin,dest,start,end,flow\nA,B,2019-13-07,2019-01-13,12\n");
        CHECK_THROWS_AS(parse_flow_csv(in, five_column_map()), DataError);
    }
    SUBCASE("ragged row") {
        std::istringstream in("origin,dest,start,end,flow\nA,B,2019-01-07,12\n");
        CHECK_THROWS_AS(parse_flow_csv(in, five_column_map()), DataError);
    }
    SUBCASE("population without devices") {
        ColumnMap c = five_column_map();
        c.pop_origin = "pop";
        c.num_devices_origin = "dev";
        std::istringstream in("origin,dest,start,end,flow,pop,dev\nA,B,2019-01-07,2019-01-13,1,100,\n");
        CHECK_THROWS_AS(parse_flow_csv(in, c), DataError);
    }
}

TEST_CASE("write_flow_csv output parses back to identical records") {
    ColumnMap c = five_column_map();
    c.pop_origin = "pop";
    c.num_devices_origin = "devices";
    c.date_range = "range";
    std::vector<FlowRecord> records{rec("01", "02", "2019-01-07", 1500.0), rec("a,b", "c\"d", "2020-02-29", 0.1),
                                    rec("x", "y", "2021-12-27", 1e-300)};
    records[0].pop_origin = 4903185.0;
    records[0].num_devices_origin = 123457.0;
    records[2].pop_origin = 0.0;
    records[2].num_devices_origin = 1.0 / 3.0;

    std::ostringstream out;
    write_flow_csv(out, records, c);
    std::istringstream in(out.str());
    CHECK(parse_flow_csv(in, c) == records);
}

TEST_CASE("infer_pop_flow") {
    FlowRecord r = rec("o", "d", "2019-01-07", 100.0);
    r.pop_origin = 1000.0;
    r.num_devices_origin = 1000.0;
    CHECK(infer_pop_flow(r) == 100.0);

    r.visitor_flow = 0.0;
    r.pop_origin = 123456.0;
    r.num_devices_origin = 789.0;
    CHECK(infer_pop_flow(r) == 0.0);

    r.visitor_flow = 250.0;
    r.pop_origin = 5'000'000.0;
    r.num_devices_origin = 125'000.0;
    CHECK(infer_pop_flow(r) == doctest::Approx(10000.0).epsilon(1e-15));

    r.num_devices_origin = 0.0;
    CHECK_THROWS_AS(infer_pop_flow(r), DivisionGuardError);
    r.num_devices_origin.reset();
    CHECK_THROWS_AS(infer_pop_flow(r), DivisionGuardError);
}

TEST_CASE("PlaceIndex orders identifiers lexicographically") {
    const PlaceIndex idx({"10", "02", "01", "02"});
    CHECK(idx.size() == 3);
    CHECK(idx.index_of("01") == 0);
    CHECK(idx.index_of("02") == 1);
    CHECK(idx.index_of("10") == 2);
    CHECK_THROWS_AS(idx.index_of("99"), MappingError);
}

TEST_CASE("build_od_matrix places, aggregates and zero-fills") {
    const PlaceIndex idx({"1", "2"});
    SUBCASE("direct placement") {
        const std::vector<FlowRecord> r{rec("1", "2", "2019-01-07", 4), rec("2", "1", "2019-01-07", 2)};
        const RealMatrix a = build_od_matrix(r, idx).entries;
        CHECK(a == (RealMatrix(2, 2) << 0, 4, 2, 0).finished());
    }
    SUBCASE("duplicates add") {
        const std::vector<FlowRecord> r{rec("1", "2", "2019-01-07", 4), rec("1", "2", "2019-01-07", 6)};
        CHECK(build_od_matrix(r, idx).entries(0, 1) == 10.0);
    }
    SUBCASE("empty week") {
        CHECK(build_od_matrix({}, idx).entries == RealMatrix::Zero(2, 2));
    }
    SUBCASE("self loops land on the diagonal") {
        const std::vector<FlowRecord> r{rec("2", "2", "2019-01-07", 9)};
        CHECK(build_od_matrix(r, idx).entries(1, 1) == 9.0);
    }
    SUBCASE("unknown id names the id") {
        const std::vector<FlowRecord> r{rec("1", "7", "2019-01-07", 1)};
        CHECK_THROWS_WITH_AS(build_od_matrix(r, idx), doctest::Contains("'7'"), MappingError);
    }
    SUBCASE("population quantity applies the device ratio") {
        std::vector<FlowRecord> r{rec("1", "2", "2019-01-07", 250)};
        r[0].pop_origin = 5'000'000.0;
        r[0].num_devices_origin = 125'000.0;
        CHECK(build_od_matrix(r, idx, FlowQuantity::population).entries(0, 1) == doctest::Approx(10000.0));
    }
}

TEST_CASE("symmetrize golden values") {
    OdMatrix a;
    a.entries = (RealMatrix(2, 2) << 0, 2, 0, 0).finished();
    CHECK(symmetrize(a).entries == (RealMatrix(2, 2) << 0, 1, 1, 0).finished());
    a.entries = (RealMatrix(2, 2) << 5, 4, 2, 7).finished();
    CHECK(symmetrize(a).entries == (RealMatrix(2, 2) << 5, 3, 3, 7).finished());
    a.entries = (RealMatrix(2, 2) << 1, 3, 3, 8).finished();
    CHECK(symmetrize(a).entries == a.entries);
}

TEST_CASE("symmetrize is idempotent, diagonal-preserving and flow-conserving") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 1000; ++trial) {
        OdMatrix a;
        a.entries = random_od(rng, 1 + trial % 9);
        const OdMatrix s = symmetrize(a);
        CHECK(s.entries == s.entries.transpose());
        CHECK(symmetrize(s).entries == s.entries);
        CHECK(s.entries.diagonal() == a.entries.diagonal());
        CHECK(s.entries.sum() == doctest::Approx(a.entries.sum()).epsilon(1e-12));
    }
}

TEST_CASE("build_snapshot_matrix vectorizes symmetrized weeks column-major") {
    const PlaceIndex idx({"1", "2"});
    OdMatrix w;
    w.week_start = day("2019-01-07");
    w.entries = (RealMatrix(2, 2) << 0, 4, 2, 0).finished();
    const std::vector<OdMatrix> one{w};
    const SnapshotMatrix s = build_snapshot_matrix(one, idx);
    CHECK(s.data() == (RealMatrix(4, 1) << 0, 3, 3, 0).finished());

    OdMatrix w2 = w;
    w2.week_start = day("2019-01-14");
    const std::vector<OdMatrix> two{w, w2};
    const SnapshotMatrix s2 = build_snapshot_matrix(two, idx);
    CHECK(s2.data().col(0) == s2.data().col(1));
}

TEST_CASE("build_snapshot_matrix column length is k squared") {
    std::vector<std::string> ids;
    for (int i = 1; i <= 52; ++i) ids.push_back(std::to_string(100 + i));
    const PlaceIndex idx(ids);
    OdMatrix w;
    w.week_start = day("2019-01-07");
    w.entries = RealMatrix::Ones(52, 52);
    const std::vector<OdMatrix> weeks{w};
    CHECK(build_snapshot_matrix(weeks, idx).n() == 2704);
}

TEST_CASE("build_snapshot_matrix errors") {
    const PlaceIndex idx({"1", "2"});
    OdMatrix a;
    a.week_start = day("2019-01-14");
    a.entries = RealMatrix::Zero(2, 2);
    OdMatrix b = a;
    SUBCASE("duplicate week") {
        const std::vector<OdMatrix> w{a, b};
        CHECK_THROWS_AS(build_snapshot_matrix(w, idx), OrderingError);
    }
    SUBCASE("out of order") {
        b.week_start = day("2019-01-07");
        const std::vector<OdMatrix> w{a, b};
        CHECK_THROWS_AS(build_snapshot_matrix(w, idx), OrderingError);
    }
    SUBCASE("inconsistent k") {
        b.week_start = day("2019-01-21");
        b.entries = RealMatrix::Zero(3, 3);
        const std::vector<OdMatrix> w{a, b};
        CHECK_THROWS_AS(build_snapshot_matrix(w, idx), ShapeError);
    }
}

TEST_CASE("assemble_snapshots on a two-place, three-week fixture") {
    const std::vector<FlowRecord> r{
        rec("2", "1", "2019-01-14", 6), rec("1", "2", "2019-01-07", 4), rec("2", "1", "2019-01-07", 2),
        rec("1", "1", "2019-01-21", 5), rec("1", "2", "2019-01-14", 1),
    };
    const SnapshotMatrix s = assemble_snapshots(r);
    CHECK(s.k() == 2);
    CHECK(s.m() == 3);
    CHECK(s.weeks()[0] == day("2019-01-07"));
    CHECK(s.weeks()[2] == day("2019-01-21"));
    CHECK(s.data() == (RealMatrix(4, 3) << 0, 0, 5, 3, 3.5, 0, 3, 3.5, 0, 0, 0, 0).finished());
    CHECK(s.pair_series(0, 1) == (RealVector(3) << 3, 3.5, 0).finished());
    for (std::size_t t = 0; t < s.m(); ++t) CHECK(s.unvec(t) == s.unvec(t).transpose());
}

TEST_CASE("snapshot file round-trips exactly") {
    std::mt19937_64 rng(9);
    std::vector<OdMatrix> weeks;
    for (int t = 0; t < 5; ++t) {
        OdMatrix w;
        w.week_start = day("2020-03-09").plus_days(7 * t);
        w.entries = random_od(rng, 4) / 3.0;
        weeks.push_back(w);
    }
    const SnapshotMatrix s = build_snapshot_matrix(weeks, PlaceIndex({"AK", "AL", "NY", "PR"}));
    std::stringstream buf;
    write_snapshot_file(buf, s);
    const SnapshotMatrix back = read_snapshot_file(buf);
    CHECK(back.places() == s.places());
    CHECK(back.weeks() == s.weeks());
    CHECK(back.data() == s.data());
    for (std::size_t t = 0; t < back.m(); ++t) CHECK(back.unvec(t) == back.unvec(t).transpose());
}

TEST_CASE("snapshot file reader rejects damage") {
    std::istringstream bad_magic("something else\n");
    CHECK_THROWS_AS(read_snapshot_file(bad_magic), FormatError);
    std::istringstream truncated("flowdmd-snapshots\t1\nk\t2\nm\t1\nplace\ta\nplace\tb\nweek\t2019-01-07\ncol\t1\t2\n");
    CHECK_THROWS_AS(read_snapshot_file(truncated), FormatError);
}
