// SPDX-License-Identifier: Apache-2.0

#include "flowdmd/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include "flowdmd/errors.hpp"
#include "flowdmd/text.hpp"

namespace flowdmd {

namespace {

void require_same_length(const RealVector& truth, const RealVector& pred) {
    if (truth.size() != pred.size()) {
        throw ArgumentError("error metric: truth has " + std::to_string(truth.size()) +
                            " entries, prediction " + std::to_string(pred.size()));
    }
}

std::string describe(const WeekRange& r) {
    return std::to_string(r.first) + ":" + std::to_string(r.last);
}

}  // namespace

void SplitSpec::validate(std::size_t m) const {
    if (train.first < 1 || test.first < 1) throw ArgumentError("week indices are 1-based");
    if (train.first > train.last) throw ArgumentError("empty train range " + describe(train));
    if (test.first > test.last) throw ArgumentError("empty test range " + describe(test));
    if (test.first <= train.last) {
        throw ArgumentError("test range " + describe(test) + " must start after train range " +
                            describe(train));
    }
    if (m > 0 && train.last > m) {
        throw ArgumentError("train range " + describe(train) + " exceeds " + std::to_string(m) + " weeks");
    }
}

double relative_l2_error(const RealVector& truth, const RealVector& pred) {
    require_same_length(truth, pred);
    const double denom = truth.norm();
    if (!(denom > 0.0)) throw DivisionGuardError("relative L2 error: truth has zero norm");
    return (truth - pred).norm() / denom;
}

double relative_linf_error(const RealVector& truth, const RealVector& pred) {
    require_same_length(truth, pred);
    const double denom = truth.size() == 0 ? 0.0 : truth.cwiseAbs().maxCoeff();
    if (!(denom > 0.0)) throw DivisionGuardError("relative Linf error: truth is identically zero");
    return (truth - pred).cwiseAbs().maxCoeff() / denom;
}

ErrorReport evaluate_model(const DmdModel& model, const SnapshotMatrix& truth, std::size_t train_first,
                           const WeekRange& test) {
    if (test.first > test.last || test.first < 1) {
        throw ArgumentError("empty test range " + describe(test));
    }
    if (train_first < 1 || test.first < train_first) {
        throw ArgumentError("test range " + describe(test) + " starts before the model's first week");
    }
    if (truth.n() != model.n) {
        throw ShapeError("truth has state dimension " + std::to_string(truth.n()) + ", model " +
                         std::to_string(model.n));
    }
    if (test.last > truth.m()) {
        std::string missing;
        const Date last = truth.m() > 0 ? truth.weeks().back() : model.t0_label;
        for (std::size_t j = std::max(test.first, truth.m() + 1); j <= test.last; ++j) {
            if (!missing.empty()) missing += ", ";
            missing += "week " + std::to_string(j) + " (" +
                       last.plus_days(7 * static_cast<long>(j - truth.m())).iso() + ")";
        }
        throw CoverageError("truth data lacks test weeks: " + missing);
    }

    ErrorReport report;
    report.rank = model.r;
    for (std::size_t j = test.first; j <= test.last; ++j) {
        const RealVector col = truth.data().col(static_cast<Eigen::Index>(j - 1));
        const double t = static_cast<double>(j - train_first) * model.dt;
        const RealVector pred = predict(model, t).values;
        ErrorRow row;
        row.week_index = j;
        row.week = truth.weeks()[j - 1];
        row.truth_l2 = col.norm();
        row.dmd_l2 = pred.norm();
        row.rel_l2 = relative_l2_error(col, pred);
        row.rel_linf = relative_linf_error(col, pred);
        report.rows.push_back(row);
    }
    return report;
}

ErrorReport evaluate_split(const SnapshotMatrix& snapshots, const SplitSpec& split, std::size_t target_rank,
                           double dt) {
    split.validate(snapshots.m());
    const SnapshotMatrix train = snapshots.slice(split.train.first - 1, split.train.last - 1);
    const DmdModel model = fit(train, target_rank, dt);
    return evaluate_model(model, snapshots, split.train.first, split.test);
}

void write_error_report(std::ostream& out, const ErrorReport& report) {
    out << "week,norm_l2_truth,norm_l2_dmd,rel_err_l2,rel_err_linf\n";
    for (const auto& r : report.rows) {
        out << r.week.iso() << ',' << text::format_double(r.truth_l2) << ','
            << text::format_double(r.dmd_l2) << ',' << text::format_double(r.rel_l2) << ','
            << text::format_double(r.rel_linf) << '\n';
    }
}

namespace {

struct Block {
    std::size_t offset;
    Complex value;  ///< real value, or the member of a pair with positive imaginary part
    bool pair;
};

std::vector<Block> pair_spectrum(const std::vector<Complex>& spectrum) {
    std::vector<Block> blocks;
    std::vector<bool> used(spectrum.size(), false);
    std::size_t offset = 0;
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
        if (used[i]) continue;
        const Complex z = spectrum[i];
        const double tol = 1e-12 * std::max(1.0, std::abs(z));
        if (std::abs(z.imag()) <= tol) {
            blocks.push_back({offset, Complex(z.real(), 0.0), false});
            used[i] = true;
            offset += 1;
            continue;
        }
        std::size_t match = spectrum.size();
        for (std::size_t j = i + 1; j < spectrum.size(); ++j) {
            if (!used[j] && std::abs(spectrum[j] - std::conj(z)) <= tol) {
                match = j;
                break;
            }
        }
        if (match == spectrum.size()) {
            throw ArgumentError("planted spectrum is not conjugate-closed: no partner for (" +
                                std::to_string(z.real()) + ", " + std::to_string(z.imag()) + ")");
        }
        used[i] = used[match] = true;
        blocks.push_back({offset, z.imag() > 0.0 ? z : std::conj(z), true});
        offset += 2;
    }
    return blocks;
}

}  // namespace

RealMatrix PlantedSystem::canonical_block() const {
    const auto dim = static_cast<Eigen::Index>(q);
    RealMatrix k = RealMatrix::Zero(dim, dim);
    for (const auto& b : pair_spectrum(spectrum)) {
        const auto o = static_cast<Eigen::Index>(b.offset);
        if (!b.pair) {
            k(o, o) = b.value.real();
        } else {
            // [[a, b], [-b, a]] has eigenvalues a +- ib.
            k(o, o) = b.value.real();
            k(o, o + 1) = b.value.imag();
            k(o + 1, o) = -b.value.imag();
            k(o + 1, o + 1) = b.value.real();
        }
    }
    return k;
}

RealMatrix PlantedSystem::operator_matrix() const {
    const RealMatrix pinv = basis.completeOrthogonalDecomposition().pseudoInverse();
    return basis * canonical_block() * pinv;
}

PlantedSystem make_planted_system(std::size_t n, std::vector<Complex> spectrum, std::uint64_t seed) {
    if (spectrum.empty()) throw ArgumentError("planted spectrum is empty");
    if (spectrum.size() > n) {
        throw ArgumentError("planted rank " + std::to_string(spectrum.size()) + " exceeds dimension " +
                            std::to_string(n));
    }
    pair_spectrum(spectrum);  // validates conjugate closure

    PlantedSystem sys;
    sys.n = n;
    sys.q = spectrum.size();
    sys.spectrum = std::move(spectrum);
    sys.seed = seed;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    sys.basis.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(sys.q));
    for (Eigen::Index j = 0; j < sys.basis.cols(); ++j) {
        for (Eigen::Index i = 0; i < sys.basis.rows(); ++i) sys.basis(i, j) = normal(rng);
    }
    return sys;
}

PlantedData generate_planted(const PlantedSystem& system, std::size_t num_snapshots, const RealVector& x0) {
    if (num_snapshots < 2) throw ArgumentError("generate_planted: need at least 2 snapshots");
    if (static_cast<std::size_t>(x0.size()) != system.n) {
        throw ArgumentError("generate_planted: x0 has length " + std::to_string(x0.size()) + ", expected " +
                            std::to_string(system.n));
    }

    const RealMatrix pinv = system.basis.completeOrthogonalDecomposition().pseudoInverse();
    const RealMatrix k = system.canonical_block();
    RealVector z = pinv * x0;

    PlantedData out;
    const double zscale = std::max(z.cwiseAbs().maxCoeff(), 1e-300);
    for (const auto& b : pair_spectrum(system.spectrum)) {
        const auto o = static_cast<Eigen::Index>(b.offset);
        const double excitation = b.pair ? std::hypot(z(o), z(o + 1)) : std::abs(z(o));
        if (excitation <= 1e-12 * zscale) {
            out.warnings.push_back("x0 does not excite planted eigenvalue (" + std::to_string(b.value.real()) +
                                   ", " + std::to_string(b.value.imag()) + "); that mode is unrecoverable");
        }
    }

    out.snapshots.resize(static_cast<Eigen::Index>(system.n), static_cast<Eigen::Index>(num_snapshots));
    out.snapshots.col(0) = x0;
    for (std::size_t t = 1; t < num_snapshots; ++t) {
        z = k * z;
        out.snapshots.col(static_cast<Eigen::Index>(t)) = system.basis * z;
    }
    return out;
}

}  // namespace flowdmd
