// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "flowdmd/cli.hpp"
#include "flowdmd/errors.hpp"
#include "flowdmd/evaluation.hpp"
#include "flowdmd/forecast_io.hpp"
#include "flowdmd/model_io.hpp"
#include "flowdmd/snapshot_io.hpp"
#include "flowdmd/text.hpp"

namespace fs = std::filesystem;
using namespace flowdmd;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("flowdmd_cli_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& leaf) const { return (path / leaf).string(); }
};

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const std::string& path, const std::string& body) { std::ofstream(path) << body; }

constexpr const char* kHeader = "geoid_o,geoid_d,lng_o,lat_o,lng_d,lat_d,date_range,visitor_flows,pop_flows\n";

// Two places, three weeks, one file per week in the published layout.
void write_fixture(const TempDir& dir) {
    fs::create_directories(dir.path / "csv");
    write_file(dir / "csv/weekly_2019_01_07.csv",
               std::string(kHeader) + "01,02,0,0,0,0,01/07/19 - 01/13/19,4,40\n02,01,0,0,0,0,01/07/19 - 01/13/19,2,20\n");
    write_file(dir / "csv/weekly_2019_01_14.csv",
               std::string(kHeader) + "01,02,0,0,0,0,01/14/19 - 01/20/19,1,10\n02,01,0,0,0,0,01/14/19 - 01/20/19,6,60\n");
    write_file(dir / "csv/weekly_2019_01_21.csv",
               std::string(kHeader) + "01,01,0,0,0,0,01/21/19 - 01/27/19,5,50\n");
}

// Planted rank-6 dynamics realized on symmetric 8 x 8 flow matrices.
SnapshotMatrix planted_snapshots(std::size_t weeks) {
    const std::size_t k = 8;
    const std::vector<Complex> spec{std::polar(0.97, 0.5), std::polar(0.97, -0.5), std::polar(0.9, 1.7),
                                    std::polar(0.9, -1.7), 1.0, 0.6};
    const PlantedSystem sys = make_planted_system(k * (k + 1) / 2, spec, 12);
    const PlantedData d = generate_planted(sys, weeks, sys.basis * RealVector::Ones(6));
    RealMatrix data(static_cast<Eigen::Index>(k * k), static_cast<Eigen::Index>(weeks));
    for (std::size_t t = 0; t < weeks; ++t) {
        std::size_t p = 0;
        for (std::size_t j = 0; j < k; ++j) {
            for (std::size_t i = 0; i <= j; ++i, ++p) {
                const double v = d.snapshots(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(t));
                data(static_cast<Eigen::Index>(i + j * k), static_cast<Eigen::Index>(t)) = v;
                data(static_cast<Eigen::Index>(j + i * k), static_cast<Eigen::Index>(t)) = v;
            }
        }
    }
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < k; ++i) ids.push_back("S" + std::to_string(i));
    std::vector<Date> labels;
    for (std::size_t t = 0; t < weeks; ++t) labels.push_back(Date::parse("2019-01-07")->plus_days(7 * static_cast<long>(t)));
    return SnapshotMatrix(PlaceIndex(ids), labels, data);
}

}  // namespace

TEST_CASE("ingest builds the hand-checkable two-place snapshot file") {
    TempDir dir("ingest");
    write_fixture(dir);
    const Result r = run({"ingest", "--input", dir / "csv", "--out", dir / "out", "--export-records"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(r.out.find("k\t2\nm\t3\n") != std::string::npos);

    const SnapshotMatrix s = read_snapshot_file(fs::path(dir / "out/snapshots.tsv"));
    CHECK(s.k() == 2);
    CHECK(s.m() == 3);
    CHECK(s.data() == (RealMatrix(4, 3) << 0, 0, 5, 3, 3.5, 0, 3, 3.5, 0, 0, 0, 0).finished());
    CHECK(slurp(dir / "out/summary.tsv").find("2\t2019-01-14\t7\n") != std::string::npos);

    // The exported records parse back to what the ingest saw.
    std::vector<FlowRecord> original;
    for (const auto& entry : fs::directory_iterator(dir.path / "csv")) {
        auto part = parse_flow_file(entry.path(), ColumnMap{});
        original.insert(original.end(), part.begin(), part.end());
    }
    const auto exported = parse_flow_file(dir / "out/records.csv", ColumnMap{});
    CHECK(exported.size() == original.size());
    CHECK(assemble_snapshots(exported).data() == s.data());

    // Re-reading and re-writing the snapshot file is byte-identical.
    std::ostringstream again;
    write_snapshot_file(again, s);
    CHECK(again.str() == slurp(dir / "out/snapshots.tsv"));
}

TEST_CASE("ingest failures exit nonzero with context") {
    TempDir dir("ingest_err");
    fs::create_directories(dir.path / "empty");
    CHECK(run({"ingest", "--input", dir / "empty", "--out", dir / "out"}).code != 0);

    write_file(dir / "bad.csv", std::string(kHeader) + "01,02,0,0,0,0,01/07/19 - 01/13/19,-4,40\n");
    const Result r = run({"ingest", "--input", dir / "bad.csv", "--out", dir / "out"});
    CHECK(r.code != 0);
    CHECK(r.err.find("bad.csv") != std::string::npos);
    CHECK(r.err.find("row 1") != std::string::npos);

    CHECK(run({"ingest", "--input", dir / "missing.csv"}).code != 0);
}

TEST_CASE("ingest can fill matrices with inferred population flow") {
    TempDir dir("ingest_pop");
    write_file(dir / "f.csv",
               "o,d,week,flow,pop,dev\nA,B,2019-01-07,250,5000000,125000\nA,B,2019-01-14,100,1000,1000\n");
    const Result r = run({"ingest", "--input", dir / "f.csv", "--out", dir / "out", "--origin-column", "o",
                          "--dest-column", "d", "--date-column", "week", "--flow-column", "flow", "--pop-column",
                          "pop", "--devices-column", "dev", "--quantity", "population"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const SnapshotMatrix s = read_snapshot_file(fs::path(dir / "out/snapshots.tsv"));
    CHECK(s.pair_series(0, 1)(0) == doctest::Approx(5000.0));
    CHECK(s.pair_series(0, 1)(1) == doctest::Approx(50.0));
}

TEST_CASE("fit, predict, evaluate, spectrum and plot on planted data") {
    TempDir dir("pipeline");
    const SnapshotMatrix snaps = planted_snapshots(50);
    write_snapshot_file(fs::path(dir / "snapshots.tsv"), snaps);

    Result r = run({"fit", "--snapshots", dir / "snapshots.tsv", "--train-weeks", "1:30", "--rank", "6,4",
                    "--out", dir / "models"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(fs::exists(dir / "models/model_r6.fdmd"));
    CHECK(fs::exists(dir / "models/model_r4.fdmd"));
    const std::string model_bytes = slurp(dir / "models/model_r6.fdmd");

    SUBCASE("fit is deterministic") {
        REQUIRE(run({"fit", "--snapshots", dir / "snapshots.tsv", "--train-weeks", "1:30", "--rank", "6", "--out",
                     dir / "models2"})
                    .code == 0);
        CHECK(slurp(dir / "models2/model_r6.fdmd") == model_bytes);
    }

    SUBCASE("predict tracks the planted trajectory") {
        r = run({"predict", "--model", dir / "models/model_r6.fdmd", "--horizon", "50", "--pair", "S2:S5",
                 "--pair", "@1:@1", "--out", dir / "fc"});
        REQUIRE_MESSAGE(r.code == 0, r.err);
        const Forecast f = read_forecast_file(fs::path(dir / "fc/model_r6.forecast.tsv"));
        CHECK(f.values.cols() == 50);
        CHECK((f.values - snaps.data()).norm() <= 1e-6 * snaps.data().norm());

        std::istringstream pairs(slurp(dir / "fc/model_r6.pairs.tsv"));
        std::string line;
        std::getline(pairs, line);
        CHECK(line == "t\tweek\tS2:S5\tS0:S0");
        const RealVector truth = snaps.pair_series(2, 5);
        double worst = 0.0;
        for (Eigen::Index t = 0; std::getline(pairs, line); ++t) {
            const auto fields = text::split(line, '\t');
            worst = std::max(worst, std::abs(*text::parse_double(fields[2]) - truth(t)));
        }
        CHECK(worst <= 1e-6 * truth.cwiseAbs().maxCoeff());

        std::ostringstream again;
        REQUIRE(run({"predict", "--model", dir / "models/model_r6.fdmd", "--horizon", "50", "--out", dir / "fc2"})
                    .code == 0);
        CHECK(slurp(dir / "fc2/model_r6.forecast.tsv") == slurp(dir / "fc/model_r6.forecast.tsv"));

        r = run({"plot", "--snapshots", dir / "snapshots.tsv", "--forecast", dir / "fc/model_r6.forecast.tsv",
                 "--pair", "S2:S5", "--out", dir / "plots"});
        REQUIRE_MESSAGE(r.code == 0, r.err);
        std::ifstream svg(dir / "plots/pair_S2_S5.svg");
        boost::property_tree::ptree tree;
        CHECK_NOTHROW(boost::property_tree::read_xml(svg, tree));
        CHECK(slurp(dir / "plots/pair_S2_S5.svg").find("DMD r=6") != std::string::npos);
    }

    SUBCASE("predict with horizon 1 is the t = 0 state") {
        REQUIRE(run({"predict", "--model", dir / "models/model_r6.fdmd", "--horizon", "1", "--out", dir / "fc"})
                    .code == 0);
        const Forecast f = read_forecast_file(fs::path(dir / "fc/model_r6.forecast.tsv"));
        const DmdModel m = load_model(fs::path(dir / "models/model_r6.fdmd"));
        CHECK(f.values.cols() == 1);
        CHECK(f.values.col(0) == predict(m, 0.0).values);
    }

    SUBCASE("evaluate writes the error table") {
        r = run({"evaluate", "--model", dir / "models/model_r6.fdmd", "--snapshots", dir / "snapshots.tsv",
                 "--test-weeks", "31:50", "--out", dir / "eval"});
        REQUIRE_MESSAGE(r.code == 0, r.err);
        std::istringstream csv(slurp(dir / "eval/model_r6.errors.csv"));
        std::string line;
        std::getline(csv, line);
        CHECK(line == "week,norm_l2_truth,norm_l2_dmd,rel_err_l2,rel_err_linf");
        int rows = 0;
        while (std::getline(csv, line)) {
            const auto f = text::split(line, ',');
            CHECK(*text::parse_double(f[3]) <= 1e-6);
            ++rows;
        }
        CHECK(rows == 20);
    }

    SUBCASE("evaluate lists missing weeks") {
        r = run({"evaluate", "--model", dir / "models/model_r6.fdmd", "--snapshots", dir / "snapshots.tsv",
                 "--test-weeks", "49:52", "--out", dir / "eval"});
        CHECK(r.code != 0);
        CHECK(r.err.find("week 51") != std::string::npos);
        CHECK(r.err.find("week 52") != std::string::npos);
    }

    SUBCASE("spectrum emits m - 1 singular values and an SVG") {
        r = run({"spectrum", "--snapshots", dir / "snapshots.tsv", "--train-weeks", "1:30", "--out", dir / "spec"});
        REQUIRE_MESSAGE(r.code == 0, r.err);
        CHECK(r.out.find("count\t29\n") != std::string::npos);
        std::istringstream tsv(slurp(dir / "spec/spectrum.tsv"));
        std::string line;
        int lines = -1;
        while (std::getline(tsv, line)) ++lines;
        CHECK(lines == 29);
        std::ifstream svg(dir / "spec/spectrum.svg");
        boost::property_tree::ptree tree;
        CHECK_NOTHROW(boost::property_tree::read_xml(svg, tree));
    }

    SUBCASE("plot without forecasts shows the data only") {
        r = run({"plot", "--snapshots", dir / "snapshots.tsv", "--pair", "S0:S1", "--out", dir / "plots"});
        REQUIRE_MESSAGE(r.code == 0, r.err);
        const std::string doc = slurp(dir / "plots/pair_S0_S1.svg");
        std::size_t lines = 0;
        for (auto p = doc.find("<polyline"); p != std::string::npos; p = doc.find("<polyline", p + 1)) ++lines;
        CHECK(lines == 1);
    }

    SUBCASE("plot rejects a forecast for different places") {
        TempDir other("pipeline_other");
        write_fixture(other);
        REQUIRE(run({"ingest", "--input", other / "csv", "--out", other / "out"}).code == 0);
        REQUIRE(run({"predict", "--model", dir / "models/model_r6.fdmd", "--horizon", "3", "--out", dir / "fc"})
                    .code == 0);
        r = run({"plot", "--snapshots", other / "out/snapshots.tsv", "--forecast", dir / "fc/model_r6.forecast.tsv",
                 "--pair", "01:02", "--out", dir / "plots"});
        CHECK(r.code != 0);
    }
}

TEST_CASE("fit warns and truncates when the rank exceeds the effective rank") {
    TempDir dir("trunc");
    write_fixture(dir);
    REQUIRE(run({"ingest", "--input", dir / "csv", "--out", dir.path.string()}).code == 0);
    // Three weeks give X two columns; the first two symmetric columns are collinear.
    const std::string snaps = dir / "snapshots.tsv";
    SnapshotMatrix s = read_snapshot_file(fs::path(snaps));
    RealMatrix d = s.data();
    d.col(1) = 2.0 * d.col(0);
    write_snapshot_file(fs::path(snaps), SnapshotMatrix(s.places(), s.weeks(), d));

    const Result r = run({"fit", "--snapshots", snaps, "--rank", "2", "--out", dir / "m"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(r.err.find("warning") != std::string::npos);
    const DmdModel m = load_model(fs::path(dir / "m/model_r2.fdmd"));
    CHECK(m.svd_rank == 1);
}

TEST_CASE("config file supplies defaults that flags override") {
    TempDir dir("config");
    write_snapshot_file(fs::path(dir / "snapshots.tsv"), planted_snapshots(20));
    write_file(dir / "run.ini", "# experiment\nsnapshots = " + (dir / "snapshots.tsv") +
                                    "\ntrain-weeks = 1:12\nrank = 3\nout = " + (dir / "from_config") + "\n");
    Result r = run({"fit", "--config", dir / "run.ini"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(fs::exists(dir / "from_config/model_r3.fdmd"));
    CHECK(load_model(fs::path(dir / "from_config/model_r3.fdmd")).training_snapshots == 12);

    r = run({"fit", "--config", dir / "run.ini", "--rank", "5", "--out", dir / "from_flags"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(fs::exists(dir / "from_flags/model_r5.fdmd"));
    CHECK_FALSE(fs::exists(dir / "from_flags/model_r3.fdmd"));
}

TEST_CASE("week ranges accept numbers and dates") {
    std::vector<Date> weeks;
    for (int t = 0; t < 156; ++t) weeks.push_back(Date::parse("2019-01-07")->plus_days(7 * t));
    CHECK(cli::parse_week_range("1:52", weeks) == WeekRange{1, 52});
    const WeekRange covid = cli::parse_week_range("2020-03-09:2021-05-31", weeks);
    CHECK(covid.size() == 65);
    CHECK(cli::parse_week_range("2020-03-11:2020-03-15", weeks) == WeekRange{62, 62});
    CHECK_THROWS_AS(cli::parse_week_range("5", weeks), ArgumentError);
    CHECK_THROWS_AS(cli::parse_week_range("9:3", weeks), ArgumentError);
    CHECK_THROWS_AS(cli::parse_week_range("2030-01-01:2030-02-01", weeks), ArgumentError);
    CHECK(cli::parse_ranks("5,10,15") == std::vector<std::size_t>{5, 10, 15});
    CHECK_THROWS_AS(cli::parse_ranks("5,0"), ArgumentError);
}

TEST_CASE("the executable reports usage and errors through its exit code") {
    const std::string exe = FLOWDMD_CLI_PATH;
    CHECK(std::system((exe + " --help > /dev/null").c_str()) == 0);
    CHECK(std::system((exe + " > /dev/null 2>&1").c_str()) != 0);
    CHECK(std::system((exe + " fit --snapshots /nonexistent --rank 1 > /dev/null 2>&1").c_str()) != 0);
}
