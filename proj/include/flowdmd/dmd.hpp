// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "flowdmd/date.hpp"
#include "flowdmd/ingestion.hpp"
#include "flowdmd/linalg.hpp"

namespace flowdmd {

/// Eigenvalues with magnitude at or below this have no logarithm and are dropped.
inline constexpr double kZeroEigenvalue = 1e-12;

/// Exact DMD model x(t) = Phi * exp(Omega * t) * b.
///
/// t is measured in the same unit as dt (weeks) from the first training
/// snapshot, so training column j (0-based) sits at t = j * dt.
struct DmdModel {
    std::size_t n = 0;             ///< state dimension
    std::size_t r = 0;             ///< retained modes
    ComplexMatrix modes;           ///< n x r, Phi
    ComplexVector discrete_eigs;   ///< lambda
    ComplexVector cont_eigs;       ///< omega = log(lambda) / dt, principal branch
    ComplexVector amplitudes;      ///< b, least-squares fit to the first snapshot
    double dt = 1.0;
    Date t0_label;

    // Fit metadata.
    std::size_t requested_rank = 0;
    std::size_t svd_rank = 0;       ///< min(requested_rank, effective rank of X)
    std::size_t dropped_modes = 0;  ///< modes discarded for |lambda| <= kZeroEigenvalue
    std::size_t training_snapshots = 0;
    PlaceIndex places;              ///< empty when fitted on a bare matrix

    bool rank_truncated() const { return svd_rank < requested_rank; }
    double spectral_radius() const;
};

/// Intermediate quantities of a fit, exposed for diagnostics and tests.
struct DmdFit {
    DmdModel model;
    SvdFactors svd;                  ///< truncated SVD of X
    RealMatrix reduced_operator;     ///< A~ = U^T X' V Sigma^-1
    ComplexMatrix reduced_eigvecs;   ///< W, retained columns only
};

DmdFit fit_detailed(const RealMatrix& snapshots, std::size_t target_rank, double dt,
                    Date t0_label = {});

/// Fit on a snapshot matrix; t0_label is the first week and places are kept
/// for pair lookup.
DmdModel fit(const SnapshotMatrix& snapshots, std::size_t target_rank, double dt = 1.0);
DmdModel fit(const RealMatrix& snapshots, std::size_t target_rank, double dt = 1.0,
             Date t0_label = {});

struct Prediction {
    RealVector values;          ///< Re(Phi exp(Omega t) b), unclamped
    double imag_max_abs = 0.0;  ///< max |Im| of the complex state
};

/// Evaluate the modal expansion at time t >= 0.
Prediction predict(const DmdModel& model, double t);

/// Column j holds predict(model, j * dt).
RealMatrix reconstruct(const DmdModel& model, std::size_t num_weeks);

struct SpectrumReport {
    RealVector singular_values;  ///< of X = columns 1..m-1, decreasing
    Date first_week;
    Date last_week;              ///< label of the last column of X
};

SpectrumReport spectrum(const SnapshotMatrix& snapshots);
SpectrumReport spectrum(const RealMatrix& snapshots);

}  // namespace flowdmd
