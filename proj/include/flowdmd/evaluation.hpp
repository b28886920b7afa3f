// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "flowdmd/dmd.hpp"
#include "flowdmd/ingestion.hpp"

namespace flowdmd {

/// Inclusive, 1-based range of week indices.
struct WeekRange {
    std::size_t first = 1;
    std::size_t last = 1;

    std::size_t size() const { return last - first + 1; }
    friend bool operator==(const WeekRange&, const WeekRange&) = default;
};

struct SplitSpec {
    WeekRange train;
    WeekRange test;

    /// Throws ArgumentError unless both ranges are non-empty, train ends
    /// before test starts, and (when m > 0) both lie within 1..m.
    void validate(std::size_t m = 0) const;
};

/// ||truth - pred||_2 / ||truth||_2
double relative_l2_error(const RealVector& truth, const RealVector& pred);

/// max|truth - pred| / max|truth|
double relative_linf_error(const RealVector& truth, const RealVector& pred);

struct ErrorRow {
    std::size_t week_index = 0;  ///< 1-based position in the truth data
    Date week;
    double truth_l2 = 0.0;
    double dmd_l2 = 0.0;
    double rel_l2 = 0.0;
    double rel_linf = 0.0;
};

struct ErrorReport {
    std::size_t rank = 0;
    std::vector<ErrorRow> rows;
};

/// Score a fitted model against truth columns. `train_first` is the 1-based
/// week the model's t = 0 corresponds to; test week j is predicted at
/// t = (j - train_first) * dt. Throws CoverageError listing absent weeks.
ErrorReport evaluate_model(const DmdModel& model, const SnapshotMatrix& truth, std::size_t train_first,
                           const WeekRange& test);

/// Fit on the train columns only, then score every test week.
ErrorReport evaluate_split(const SnapshotMatrix& snapshots, const SplitSpec& split,
                           std::size_t target_rank, double dt = 1.0);

/// CSV with columns: week, ||M_i||_2, ||M_dmd_i||_2, rel-L2, rel-Linf.
void write_error_report(std::ostream& out, const ErrorReport& report);

/// Linear system x_{t+1} = B K B^+ x_t with K the real canonical form of a
/// conjugate-closed spectrum (1x1 blocks for real values, 2x2 rotation-scaling
/// blocks for pairs).
struct PlantedSystem {
    std::size_t n = 0;
    std::size_t q = 0;
    std::vector<Complex> spectrum;
    RealMatrix basis;  ///< n x q, full column rank
    std::uint64_t seed = 0;

    /// q x q block-diagonal real matrix with eigenvalues `spectrum`.
    RealMatrix canonical_block() const;
    /// n x n operator B K B^+.
    RealMatrix operator_matrix() const;
};

/// Random Gaussian basis from `seed`. Throws ArgumentError when the spectrum
/// is not conjugate-closed or q > n.
PlantedSystem make_planted_system(std::size_t n, std::vector<Complex> spectrum, std::uint64_t seed);

struct PlantedData {
    RealMatrix snapshots;               ///< n x num_snapshots, column 0 = x0
    std::vector<std::string> warnings;  ///< degenerate-excitation notices
};

PlantedData generate_planted(const PlantedSystem& system, std::size_t num_snapshots, const RealVector& x0);

}  // namespace flowdmd
