// SPDX-License-Identifier: Apache-2.0

#include "flowdmd/dmd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "flowdmd/errors.hpp"

namespace flowdmd {

namespace {

// log(DBL_MAX); exp of anything larger overflows.
const double kMaxExponent = std::log(std::numeric_limits<double>::max());

Complex principal_log(Complex z) {
    Complex w = std::log(z);
    if (w.imag() <= -std::numbers::pi) w = Complex(w.real(), std::numbers::pi);
    return w;
}

}  // namespace

double DmdModel::spectral_radius() const {
    return discrete_eigs.size() == 0 ? 0.0 : discrete_eigs.cwiseAbs().maxCoeff();
}

DmdFit fit_detailed(const RealMatrix& data, std::size_t target_rank, double dt, Date t0_label) {
    const auto n = static_cast<std::size_t>(data.rows());
    const auto m = static_cast<std::size_t>(data.cols());
    if (m < 2) {
        throw InsufficientDataError("DMD fit needs at least 2 snapshots, got " + std::to_string(m));
    }
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw ArgumentError("DMD fit: dt must be positive and finite");
    }
    const std::size_t max_rank = std::min(n, m - 1);
    if (target_rank < 1 || target_rank > max_rank) {
        throw ArgumentError("DMD fit: target rank " + std::to_string(target_rank) + " outside [1, " +
                            std::to_string(max_rank) + "]");
    }

    const auto cols = static_cast<Eigen::Index>(m - 1);
    const RealMatrix x = data.leftCols(cols);
    const RealMatrix x_next = data.rightCols(cols);

    DmdFit out;
    out.svd = reduced_svd(x, target_rank);
    if (out.svd.effective_rank == 0) {
        throw DegenerateDataError("DMD fit: all singular values of X are zero");
    }
    const auto r = static_cast<Eigen::Index>(std::min(target_rank, out.svd.effective_rank));
    out.svd.u.conservativeResize(Eigen::NoChange, r);
    out.svd.v.conservativeResize(Eigen::NoChange, r);
    out.svd.sigma.conservativeResize(r);

    // X' V Sigma^-1 is shared by the reduced operator and the exact modes.
    const RealMatrix projected = x_next * out.svd.v * out.svd.sigma.cwiseInverse().asDiagonal();
    out.reduced_operator = out.svd.u.transpose() * projected;

    const EigenDecomposition eig = eig_dense(out.reduced_operator);
    const double scale = out.reduced_operator.cwiseAbs().maxCoeff();
    if (eig.residual > 1e-8 * std::max(scale, 1.0)) {
        throw NumericalError("DMD fit: eigendecomposition of the reduced operator is inaccurate",
                             eig.residual);
    }

    std::vector<Eigen::Index> keep;
    for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
        if (std::abs(eig.values(k)) > kZeroEigenvalue) keep.push_back(k);
    }
    if (keep.empty()) {
        throw DegenerateDataError("DMD fit: every eigenvalue of the reduced operator is zero");
    }

    DmdModel& model = out.model;
    model.n = n;
    model.r = keep.size();
    model.dt = dt;
    model.t0_label = t0_label;
    model.requested_rank = target_rank;
    model.svd_rank = static_cast<std::size_t>(r);
    model.dropped_modes = static_cast<std::size_t>(r) - keep.size();
    model.training_snapshots = m;

    const auto kept = static_cast<Eigen::Index>(keep.size());
    out.reduced_eigvecs.resize(r, kept);
    model.discrete_eigs.resize(kept);
    model.cont_eigs.resize(kept);
    for (Eigen::Index c = 0; c < kept; ++c) {
        out.reduced_eigvecs.col(c) = eig.vectors.col(keep[static_cast<std::size_t>(c)]);
        const Complex lambda = eig.values(keep[static_cast<std::size_t>(c)]);
        model.discrete_eigs(c) = lambda;
        model.cont_eigs(c) = principal_log(lambda) / dt;
    }

    model.modes = projected.cast<Complex>() * out.reduced_eigvecs;
    model.amplitudes = least_squares(model.modes, data.col(0).cast<Complex>());
    return out;
}

DmdModel fit(const RealMatrix& snapshots, std::size_t target_rank, double dt, Date t0_label) {
    return fit_detailed(snapshots, target_rank, dt, t0_label).model;
}

DmdModel fit(const SnapshotMatrix& snapshots, std::size_t target_rank, double dt) {
    if (snapshots.m() < 2) {
        throw InsufficientDataError("DMD fit needs at least 2 weeks, got " + std::to_string(snapshots.m()));
    }
    DmdModel model = fit(snapshots.data(), target_rank, dt, snapshots.weeks().front());
    model.places = snapshots.places();
    return model;
}

Prediction predict(const DmdModel& model, double t) {
    if (!std::isfinite(t)) throw ArgumentError("predict: time must be finite");
    if (t < 0.0) throw ArgumentError("predict: time must be nonnegative");

    ComplexVector weights(static_cast<Eigen::Index>(model.r));
    for (Eigen::Index k = 0; k < weights.size(); ++k) {
        const Complex omega = model.cont_eigs(k);
        if (omega.real() * t > kMaxExponent) {
            throw OverflowError("predict: mode " + std::to_string(k) + " (|lambda| = " +
                                    std::to_string(std::abs(model.discrete_eigs(k))) +
                                    ") overflows at t = " + std::to_string(t),
                                static_cast<std::size_t>(k));
        }
        weights(k) = std::exp(omega * t) * model.amplitudes(k);
    }
    const ComplexVector state = model.modes * weights;

    Prediction out;
    out.values = state.real();
    out.imag_max_abs = state.size() == 0 ? 0.0 : state.imag().cwiseAbs().maxCoeff();
    if (!out.values.allFinite()) {
        Eigen::Index worst = 0;
        model.cont_eigs.real().maxCoeff(&worst);
        throw OverflowError("predict: state overflows at t = " + std::to_string(t) + " (fastest mode " +
                                std::to_string(worst) + ")",
                            static_cast<std::size_t>(worst));
    }
    return out;
}

RealMatrix reconstruct(const DmdModel& model, std::size_t num_weeks) {
    if (num_weeks < 1) throw ArgumentError("reconstruct: num_weeks must be at least 1");
    RealMatrix out(static_cast<Eigen::Index>(model.n), static_cast<Eigen::Index>(num_weeks));
    for (std::size_t j = 0; j < num_weeks; ++j) {
        out.col(static_cast<Eigen::Index>(j)) = predict(model, static_cast<double>(j) * model.dt).values;
    }
    return out;
}

SpectrumReport spectrum(const RealMatrix& snapshots) {
    if (snapshots.cols() < 2) {
        throw InsufficientDataError("spectrum needs at least 2 snapshots, got " +
                                    std::to_string(snapshots.cols()));
    }
    const RealMatrix x = snapshots.leftCols(snapshots.cols() - 1);
    const auto full = static_cast<std::size_t>(std::min(x.rows(), x.cols()));
    SpectrumReport out;
    out.singular_values = reduced_svd(x, full).sigma;
    return out;
}

SpectrumReport spectrum(const SnapshotMatrix& snapshots) {
    SpectrumReport out = spectrum(snapshots.data());
    out.first_week = snapshots.weeks().front();
    out.last_week = snapshots.weeks()[snapshots.m() - 2];
    return out;
}

}  // namespace flowdmd
