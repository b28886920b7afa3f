// SPDX-License-Identifier: Apache-2.0

#include "flowdmd/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "flowdmd/dmd.hpp"
#include "flowdmd/errors.hpp"
#include "flowdmd/forecast_io.hpp"
#include "flowdmd/ingestion.hpp"
#include "flowdmd/model_io.hpp"
#include "flowdmd/snapshot_io.hpp"
#include "flowdmd/svg.hpp"
#include "flowdmd/text.hpp"

namespace fs = std::filesystem;

namespace flowdmd::cli {

namespace {

struct RunConfig {
    std::vector<std::string> inputs;
    std::string snapshots;
    std::vector<std::string> models;
    std::vector<std::string> forecasts;
    std::string train_weeks;
    std::string test_weeks;
    std::string ranks;
    double dt = 1.0;
    std::vector<std::string> pairs;
    std::size_t horizon = 0;
    std::string out = ".";

    ColumnMap columns;
    std::string pop_column;
    std::string devices_column;
    std::string delimiter = ",";
    std::string quantity = "visitor";
    bool export_records = false;
};

// Comma-separated lists are accepted wherever a flag may repeat.
std::vector<std::string> flatten(const std::vector<std::string>& values) {
    std::vector<std::string> out;
    for (const auto& v : values) {
        for (auto piece : text::split(v, ',')) {
            piece = text::trim(piece);
            if (!piece.empty()) out.emplace_back(piece);
        }
    }
    return out;
}

void require(bool ok, const std::string& what) {
    if (!ok) throw ArgumentError(what);
}

fs::path output_dir(const RunConfig& cfg) {
    fs::path dir(cfg.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw ArgumentError("output directory '" + cfg.out + "' is not writable");
    return dir;
}

std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
    std::vector<fs::path> files;
    for (const auto& in : inputs) {
        const fs::path p(in);
        if (fs::is_directory(p)) {
            std::vector<fs::path> found;
            for (const auto& entry : fs::directory_iterator(p)) {
                if (entry.is_regular_file() && entry.path().extension() == ".csv") found.push_back(entry.path());
            }
            std::sort(found.begin(), found.end());
            if (found.empty()) throw ArgumentError("input directory '" + in + "' contains no .csv files");
            files.insert(files.end(), found.begin(), found.end());
        } else if (fs::is_regular_file(p)) {
            files.push_back(p);
        } else {
            throw ArgumentError("input '" + in + "' does not exist");
        }
    }
    return files;
}

SnapshotMatrix train_slice(const SnapshotMatrix& all, const RunConfig& cfg, WeekRange& range) {
    range = cfg.train_weeks.empty() ? WeekRange{1, all.m()} : parse_week_range(cfg.train_weeks, all.weeks());
    if (range.last > all.m()) {
        throw ArgumentError("train weeks " + cfg.train_weeks + " exceed the " + std::to_string(all.m()) +
                            " weeks available");
    }
    return all.slice(range.first - 1, range.last - 1);
}

int cmd_ingest(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    require(!cfg.inputs.empty(), "ingest: --input is required");
    ColumnMap columns = cfg.columns;
    require(cfg.delimiter.size() == 1, "--delimiter must be a single character");
    columns.delimiter = cfg.delimiter == "\\t" ? '\t' : cfg.delimiter[0];
    if (!cfg.pop_column.empty()) columns.pop_origin = cfg.pop_column;
    if (!cfg.devices_column.empty()) columns.num_devices_origin = cfg.devices_column;

    FlowQuantity quantity = FlowQuantity::visitor;
    if (cfg.quantity == "population") {
        require(columns.pop_origin && columns.num_devices_origin,
                "--quantity population needs --pop-column and --devices-column");
        quantity = FlowQuantity::population;
    } else {
        require(cfg.quantity == "visitor", "--quantity must be 'visitor' or 'population'");
    }

    std::vector<FlowRecord> records;
    for (const auto& file : expand_inputs(flatten(cfg.inputs))) {
        auto part = parse_flow_file(file, columns);
        records.insert(records.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    require(!records.empty(), "ingest: inputs contain no data rows");
    for (const auto& r : records) {
        if (r.origin_id.find_first_of("\t\n") != std::string::npos ||
            r.dest_id.find_first_of("\t\n") != std::string::npos) {
            throw DataError("place identifier contains a tab or newline", 0);
        }
    }

    const SnapshotMatrix snaps = assemble_snapshots(records, quantity);
    const fs::path dir = output_dir(cfg);
    write_snapshot_file(dir / "snapshots.tsv", snaps);
    {
        std::ofstream summary(dir / "summary.tsv");
        write_snapshot_summary(summary, snaps);
    }
    if (cfg.export_records) {
        std::ofstream csv(dir / "records.csv");
        write_flow_csv(csv, records, columns);
    }
    out << "k\t" << snaps.k() << "\nm\t" << snaps.m() << "\nfirst_week\t" << snaps.weeks().front().iso()
        << "\nlast_week\t" << snaps.weeks().back().iso() << '\n';
    err << "wrote " << (dir / "snapshots.tsv").string() << '\n';
    return 0;
}

int cmd_fit(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    require(!cfg.snapshots.empty(), "fit: --snapshots is required");
    require(!cfg.ranks.empty(), "fit: --rank is required");
    const SnapshotMatrix all = read_snapshot_file(fs::path(cfg.snapshots));
    WeekRange range;
    const SnapshotMatrix train = train_slice(all, cfg, range);
    const fs::path dir = output_dir(cfg);

    out << "rank\tretained\tsvd_rank\tdropped\tspectral_radius\tfile\n";
    for (const std::size_t r : parse_ranks(cfg.ranks)) {
        DmdModel model;
        try {
            model = fit(train, r, cfg.dt);
        } catch (const Error& e) {
            throw Error("rank " + std::to_string(r) + ": " + e.what());
        }
        if (model.rank_truncated()) {
            err << "warning: rank " << r << " exceeds the effective rank of X; truncated to " << model.svd_rank
                << '\n';
        }
        if (model.dropped_modes > 0) {
            err << "warning: rank " << r << ": dropped " << model.dropped_modes << " zero-eigenvalue mode(s)\n";
        }
        const fs::path file = dir / ("model_r" + std::to_string(r) + ".fdmd");
        save_model(file, model);
        out << r << '\t' << model.r << '\t' << model.svd_rank << '\t' << model.dropped_modes << '\t'
            << text::format_double(model.spectral_radius()) << '\t' << file.string() << '\n';
    }
    return 0;
}

int cmd_predict(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto models = flatten(cfg.models);
    require(!models.empty(), "predict: --model is required");
    require(cfg.horizon >= 1, "predict: --horizon must be at least 1");
    std::vector<PlacePair> pairs;
    for (const auto& p : flatten(cfg.pairs)) pairs.push_back(parse_pair(p));
    const fs::path dir = output_dir(cfg);

    for (const auto& path : models) {
        const DmdModel model = load_model(fs::path(path));
        const Forecast f = make_forecast(model, cfg.horizon);

        double worst_ratio = 0.0;
        for (Eigen::Index j = 0; j < f.values.cols(); ++j) {
            const double imag = predict(model, f.times[static_cast<std::size_t>(j)]).imag_max_abs;
            const double scale = f.values.col(j).cwiseAbs().maxCoeff();
            if (scale > 0.0) worst_ratio = std::max(worst_ratio, imag / scale);
        }
        if (worst_ratio > 1e-6) {
            err << "warning: " << path << ": imaginary residual reaches " << worst_ratio
                << " of the real magnitude\n";
        }

        const std::string stem = fs::path(path).stem().string();
        write_forecast_file(dir / (stem + ".forecast.tsv"), f);
        if (!pairs.empty()) {
            std::ofstream ps(dir / (stem + ".pairs.tsv"));
            write_pair_series(ps, f, pairs);
        }
        out << stem << "\trank\t" << model.r << "\thorizon\t" << cfg.horizon << "\tmax_imag_ratio\t"
            << text::format_double(worst_ratio) << '\n';
    }
    return 0;
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out, std::ostream&) {
    const auto models = flatten(cfg.models);
    require(!models.empty(), "evaluate: --model is required");
    require(!cfg.snapshots.empty(), "evaluate: --snapshots is required");
    require(!cfg.test_weeks.empty(), "evaluate: --test-weeks is required");
    const SnapshotMatrix truth = read_snapshot_file(fs::path(cfg.snapshots));
    const WeekRange test = parse_week_range(cfg.test_weeks, truth.weeks());
    const fs::path dir = output_dir(cfg);

    for (const auto& path : models) {
        const DmdModel model = load_model(fs::path(path));
        const auto start = truth.find_week(model.t0_label);
        if (!start) {
            throw CoverageError(path + ": first training week " + model.t0_label.iso() +
                                " is not in the truth data");
        }
        const ErrorReport report = evaluate_model(model, truth, *start + 1, test);
        const std::string stem = fs::path(path).stem().string();
        std::ofstream csv(dir / (stem + ".errors.csv"));
        write_error_report(csv, report);

        out << "# " << stem << " (rank " << report.rank << ")\n";
        out << "week\t||M_i||_2\t||M_dmd_i||_2\trel_L2\trel_Linf\n";
        for (const auto& r : report.rows) {
            std::ostringstream row;
            row << r.week.iso() << std::scientific << std::setprecision(4) << '\t' << r.truth_l2 << '\t'
                << r.dmd_l2 << std::fixed << '\t' << r.rel_l2 << '\t' << r.rel_linf << '\n';
            out << row.str();
        }
    }
    return 0;
}

int cmd_spectrum(const RunConfig& cfg, std::ostream& out, std::ostream&) {
    require(!cfg.snapshots.empty(), "spectrum: --snapshots is required");
    const SnapshotMatrix all = read_snapshot_file(fs::path(cfg.snapshots));
    WeekRange range;
    const SnapshotMatrix train = train_slice(all, cfg, range);
    const SpectrumReport rep = spectrum(train);
    const fs::path dir = output_dir(cfg);

    svg::Series s;
    s.label = "sigma_i";
    {
        std::ofstream tsv(dir / "spectrum.tsv");
        tsv << "index\tsingular_value\n";
        for (Eigen::Index i = 0; i < rep.singular_values.size(); ++i) {
            tsv << (i + 1) << '\t' << text::format_double(rep.singular_values(i)) << '\n';
            s.x.push_back(static_cast<double>(i + 1));
            s.y.push_back(rep.singular_values(i));
        }
    }
    svg::Chart chart;
    chart.title = "Singular values of X, " + rep.first_week.iso() + " to " + rep.last_week.iso();
    chart.x_label = "index";
    chart.y_label = "singular value";
    chart.log_y = true;
    chart.markers = true;
    chart.series.push_back(std::move(s));
    std::ofstream(dir / "spectrum.svg") << svg::render(chart);

    out << "count\t" << rep.singular_values.size() << "\nfirst_week\t" << rep.first_week.iso()
        << "\nlast_week\t" << rep.last_week.iso() << '\n';
    return 0;
}

int cmd_plot(const RunConfig& cfg, std::ostream& out, std::ostream&) {
    require(!cfg.snapshots.empty(), "plot: --snapshots is required");
    const auto pair_specs = flatten(cfg.pairs);
    require(pair_specs.size() == 1, "plot: exactly one --pair is required");
    const SnapshotMatrix truth = read_snapshot_file(fs::path(cfg.snapshots));
    const PlacePair pair = parse_pair(pair_specs.front());
    const auto [oi, di] = resolve_pair(pair, truth.places());
    const std::string oid = truth.places().id_at(oi);
    const std::string did = truth.places().id_at(di);

    svg::Chart chart;
    chart.title = "Flow " + oid + " <-> " + did;
    chart.x_label = "week";
    chart.y_label = "visitor flow";

    svg::Series real;
    real.label = "data";
    const RealVector series = truth.pair_series(oi, di);
    for (Eigen::Index t = 0; t < series.size(); ++t) {
        real.x.push_back(static_cast<double>(t + 1));
        real.y.push_back(series(t));
    }
    chart.series.push_back(std::move(real));

    for (const auto& path : flatten(cfg.forecasts)) {
        const Forecast f = read_forecast_file(fs::path(path));
        if (!(f.places == truth.places()) || static_cast<std::size_t>(f.values.rows()) != truth.n()) {
            throw ShapeError(path + ": forecast places/dimension do not match the truth snapshots");
        }
        const auto start = truth.find_week(f.t0_label);
        if (!start) throw ShapeError(path + ": forecast origin " + f.t0_label.iso() + " is not a truth week");
        svg::Series s;
        s.label = "DMD r=" + std::to_string(f.rank);
        const auto row = static_cast<Eigen::Index>(truth.row_of(oi, di));
        for (Eigen::Index j = 0; j < f.values.cols(); ++j) {
            s.x.push_back(static_cast<double>(*start + 1) + f.times[static_cast<std::size_t>(j)] / f.dt);
            s.y.push_back(f.values(row, j));
        }
        chart.series.push_back(std::move(s));
    }

    const fs::path dir = output_dir(cfg);
    const fs::path file = dir / ("pair_" + oid + "_" + did + ".svg");
    std::ofstream(file) << svg::render(chart);
    out << file.string() << '\n';
    return 0;
}

}  // namespace

WeekRange parse_week_range(const std::string& spec, const std::vector<Date>& weeks) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) throw ArgumentError("week range '" + spec + "' is not of the form A:B");

    auto endpoint = [&](std::string_view s) -> std::size_t {
        s = text::trim(s);
        if (const auto d = Date::parse(s)) {
            for (std::size_t i = 0; i < weeks.size(); ++i) {
                if (weeks[i] <= *d && days_between(*d, weeks[i]) < 7) return i + 1;
            }
            throw ArgumentError("date " + d->iso() + " falls in no week of the data");
        }
        const auto v = text::parse_double(s);
        if (!v || *v < 1.0 || *v != std::floor(*v)) {
            throw ArgumentError("week range endpoint '" + std::string(s) + "' is not a 1-based week or a date");
        }
        return static_cast<std::size_t>(*v);
    };
    WeekRange r{endpoint(std::string_view(spec).substr(0, colon)), endpoint(std::string_view(spec).substr(colon + 1))};
    if (r.first > r.last) throw ArgumentError("week range '" + spec + "' is empty");
    return r;
}

std::vector<std::size_t> parse_ranks(const std::string& spec) {
    std::vector<std::size_t> ranks;
    for (auto piece : text::split(spec, ',')) {
        const auto v = text::parse_double(piece);
        if (!v || *v < 1.0 || *v != std::floor(*v)) {
            throw ArgumentError("rank '" + std::string(text::trim(piece)) + "' is not a positive integer");
        }
        ranks.push_back(static_cast<std::size_t>(*v));
    }
    return ranks;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Dynamic mode decomposition of origin-destination flow time series", "flowdmd"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Flat key = value file; command-line flags take precedence");

    RunConfig cfg;
    app.add_option("--input", cfg.inputs, "Flow CSV files or directories of them");
    app.add_option("--snapshots", cfg.snapshots, "Snapshot matrix file written by 'ingest'");
    app.add_option("--model", cfg.models, "Model file(s) written by 'fit'");
    app.add_option("--forecast", cfg.forecasts, "Forecast file(s) written by 'predict'");
    app.add_option("--train-weeks", cfg.train_weeks, "Training weeks A:B (1-based week numbers or dates)");
    app.add_option("--test-weeks", cfg.test_weeks, "Test weeks A:B");
    app.add_option("--rank", cfg.ranks, "Target rank(s) r[,r...]");
    app.add_option("--dt", cfg.dt, "Time step between snapshots, in weeks")->check(CLI::PositiveNumber);
    app.add_option("--pair", cfg.pairs, "Origin:destination pair; '@i' selects the i-th place");
    app.add_option("--horizon", cfg.horizon, "Forecast length in steps");
    app.add_option("--out", cfg.out, "Output directory");
    app.add_option("--origin-column", cfg.columns.origin, "Header of the origin id column");
    app.add_option("--dest-column", cfg.columns.dest, "Header of the destination id column");
    app.add_option("--date-column", cfg.columns.date_range, "Header of the date range column");
    app.add_option("--flow-column", cfg.columns.visitor_flow, "Header of the visitor flow column");
    app.add_option("--pop-column", cfg.pop_column, "Header of the origin population column");
    app.add_option("--devices-column", cfg.devices_column, "Header of the origin device count column");
    app.add_option("--delimiter", cfg.delimiter, "Field delimiter (use \\t for tab)");
    app.add_option("--quantity", cfg.quantity, "visitor or population");
    app.add_flag("--export-records", cfg.export_records, "Also write the parsed records as CSV");

    const std::vector<std::pair<const char*, const char*>> commands{
        {"ingest", "Build the snapshot matrix from flow CSVs"},
        {"fit", "Fit one DMD model per rank on the training weeks"},
        {"predict", "Forecast the full state and per-pair series"},
        {"evaluate", "Tabulate per-week norms and relative errors"},
        {"spectrum", "Singular values of the training data matrix"},
        {"plot", "SVG of one pair's data and forecasts"},
    };
    for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    const std::string cmd = app.get_subcommands().front()->get_name();
    try {
        if (cmd == "ingest") return cmd_ingest(cfg, out, err);
        if (cmd == "fit") return cmd_fit(cfg, out, err);
        if (cmd == "predict") return cmd_predict(cfg, out, err);
        if (cmd == "evaluate") return cmd_evaluate(cfg, out, err);
        if (cmd == "spectrum") return cmd_spectrum(cfg, out, err);
        if (cmd == "plot") return cmd_plot(cfg, out, err);
    } catch (const std::exception& e) {
        err << "flowdmd " << cmd << ": error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"flowdmd"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace flowdmd::cli
