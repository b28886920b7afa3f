// SPDX-License-Identifier: Apache-2.0

#include "flowdmd/snapshot_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "flowdmd/errors.hpp"
#include "flowdmd/text.hpp"

namespace flowdmd {

namespace {

std::vector<std::string_view> next_line(std::istream& in, std::string& buf, const char* expect) {
    if (!std::getline(in, buf)) {
        throw FormatError(std::string("snapshot file truncated before '") + expect + "'");
    }
    if (!buf.empty() && buf.back() == '\r') buf.pop_back();
    auto fields = text::split(buf, '\t');
    if (fields.empty() || fields[0] != expect) {
        throw FormatError(std::string("snapshot file: expected '") + expect + "', found '" +
                          std::string(fields.empty() ? "" : fields[0]) + "'");
    }
    return fields;
}

std::size_t parse_count(std::string_view field, const char* what) {
    const auto v = text::parse_double(field);
    if (!v || *v < 0.0 || *v != static_cast<double>(static_cast<std::size_t>(*v))) {
        throw FormatError(std::string("snapshot file: bad ") + what + " '" + std::string(field) + "'");
    }
    return static_cast<std::size_t>(*v);
}

}  // namespace

void write_snapshot_file(std::ostream& out, const SnapshotMatrix& s) {
    out << "flowdmd-snapshots\t" << kSnapshotFormatVersion << '\n';
    out << "k\t" << s.k() << '\n';
    out << "m\t" << s.m() << '\n';
    for (const auto& id : s.places().ids()) out << "place\t" << id << '\n';
    for (const auto& w : s.weeks()) out << "week\t" << w.iso() << '\n';
    const auto& d = s.data();
    for (Eigen::Index t = 0; t < d.cols(); ++t) {
        out << "col";
        for (Eigen::Index i = 0; i < d.rows(); ++i) out << '\t' << text::format_double(d(i, t));
        out << '\n';
    }
}

void write_snapshot_file(const std::filesystem::path& path, const SnapshotMatrix& snapshots) {
    std::ofstream out(path);
    if (!out) throw ArgumentError(path.string() + ": cannot open for writing");
    write_snapshot_file(out, snapshots);
    if (!out) throw ArgumentError(path.string() + ": write failed");
}

SnapshotMatrix read_snapshot_file(std::istream& in) {
    std::string buf;
    auto head = next_line(in, buf, "flowdmd-snapshots");
    if (head.size() != 2 || parse_count(head[1], "version") != kSnapshotFormatVersion) {
        throw FormatError("snapshot file: unsupported version");
    }
    const std::size_t k = parse_count(next_line(in, buf, "k").at(1), "k");
    const std::size_t m = parse_count(next_line(in, buf, "m").at(1), "m");

    std::vector<std::string> ids;
    for (std::size_t i = 0; i < k; ++i) {
        auto f = next_line(in, buf, "place");
        if (f.size() != 2 || f[1].empty()) throw FormatError("snapshot file: malformed place line");
        ids.emplace_back(f[1]);
    }
    PlaceIndex places(ids);
    if (places.ids() != ids) {
        throw FormatError("snapshot file: place list is not sorted and distinct");
    }

    std::vector<Date> weeks;
    for (std::size_t t = 0; t < m; ++t) {
        auto f = next_line(in, buf, "week");
        const auto d = f.size() == 2 ? Date::parse(f[1]) : std::nullopt;
        if (!d) throw FormatError("snapshot file: malformed week line '" + buf + "'");
        weeks.push_back(*d);
    }

    const auto n = static_cast<Eigen::Index>(k * k);
    RealMatrix data(n, static_cast<Eigen::Index>(m));
    for (std::size_t t = 0; t < m; ++t) {
        auto f = next_line(in, buf, "col");
        if (f.size() != k * k + 1) {
            throw FormatError("snapshot file: column " + std::to_string(t + 1) + " has " +
                              std::to_string(f.size() - 1) + " values, expected " +
                              std::to_string(k * k));
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto v = text::parse_double(f[static_cast<std::size_t>(i) + 1]);
            if (!v) throw FormatError("snapshot file: bad value in column " + std::to_string(t + 1));
            data(i, static_cast<Eigen::Index>(t)) = *v;
        }
    }
    return SnapshotMatrix(std::move(places), std::move(weeks), std::move(data));
}

SnapshotMatrix read_snapshot_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError(path.string() + ": cannot open for reading");
    try {
        return read_snapshot_file(in);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_snapshot_summary(std::ostream& out, const SnapshotMatrix& s) {
    out << "# k\t" << s.k() << "\n# m\t" << s.m() << "\nweek\tlabel\ttotal_flow\n";
    for (std::size_t t = 0; t < s.m(); ++t) {
        out << (t + 1) << '\t' << s.weeks()[t].iso() << '\t'
            << text::format_double(s.data().col(static_cast<Eigen::Index>(t)).sum()) << '\n';
    }
}

}  // namespace flowdmd
