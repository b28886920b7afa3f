// SPDX-License-Identifier: Apache-2.0

#include "flowdmd/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/SVD>

#include "flowdmd/errors.hpp"

namespace flowdmd {

bool all_finite(const RealMatrix& x) { return x.allFinite(); }

namespace {

// Index of the first entry whose magnitude is maximal.
template <typename Vec>
Eigen::Index first_argmax_abs(const Vec& v) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double a = std::abs(v(i));
        if (a > best_abs) {
            best_abs = a;
            best = i;
        }
    }
    return best;
}

}  // namespace

SvdFactors reduced_svd(const RealMatrix& x, std::size_t max_rank) {
    if (x.rows() < 1 || x.cols() < 1) {
        throw ArgumentError("reduced_svd: empty matrix");
    }
    if (!x.allFinite()) {
        throw IngestionDefectError("reduced_svd: matrix contains non-finite entries");
    }
    const auto full = static_cast<std::size_t>(std::min(x.rows(), x.cols()));
    if (max_rank < 1 || max_rank > full) {
        throw ArgumentError("reduced_svd: max_rank " + std::to_string(max_rank) +
                            " outside [1, " + std::to_string(full) + "]");
    }

    Eigen::BDCSVD<RealMatrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto r = static_cast<Eigen::Index>(max_rank);

    SvdFactors out;
    out.u = svd.matrixU().leftCols(r);
    out.v = svd.matrixV().leftCols(r);
    out.sigma = svd.singularValues().head(r);

    // Fix the sign ambiguity so repeated runs agree.
    for (Eigen::Index k = 0; k < r; ++k) {
        const Eigen::Index i = first_argmax_abs(out.u.col(k));
        if (out.u(i, k) < 0.0) {
            out.u.col(k) *= -1.0;
            out.v.col(k) *= -1.0;
        }
    }

    const double cutoff = kRankCutoff * (r > 0 ? out.sigma(0) : 0.0);
    for (Eigen::Index k = 0; k < r; ++k) {
        if (out.sigma(k) > cutoff) ++out.effective_rank;
    }
    return out;
}

EigenDecomposition eig_dense(const RealMatrix& a) {
    if (a.rows() != a.cols()) {
        throw ArgumentError("eig_dense: matrix is " + std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()) + ", not square");
    }
    if (a.rows() == 0) {
        throw ArgumentError("eig_dense: empty matrix");
    }
    if (!a.allFinite()) {
        throw IngestionDefectError("eig_dense: matrix contains non-finite entries");
    }

    Eigen::EigenSolver<RealMatrix> solver(a, /*computeEigenvectors=*/true);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("eig_dense: real Schur iteration did not converge",
                             std::numeric_limits<double>::infinity());
    }

    EigenDecomposition out;
    out.values = solver.eigenvalues();
    out.vectors = solver.eigenvectors();

    for (Eigen::Index k = 0; k < out.vectors.cols(); ++k) {
        auto col = out.vectors.col(k);
        const double norm = col.norm();
        if (norm > 0.0) col /= norm;
        const Eigen::Index i = first_argmax_abs(col);
        const double mag = std::abs(col(i));
        if (mag > 0.0) col *= std::conj(col(i)) / mag;
        col(i) = Complex(col(i).real(), 0.0);
    }

    const ComplexMatrix ac = a.cast<Complex>();
    const ComplexMatrix resid = ac * out.vectors - out.vectors * out.values.asDiagonal();
    out.residual = resid.cwiseAbs().maxCoeff();
    return out;
}

ComplexVector least_squares(const ComplexMatrix& a, const ComplexVector& y) {
    if (a.rows() < a.cols()) {
        throw ArgumentError("least_squares: system is underdetermined (" +
                            std::to_string(a.rows()) + " rows < " +
                            std::to_string(a.cols()) + " cols)");
    }
    if (y.size() != a.rows()) {
        throw ArgumentError("least_squares: rhs length " + std::to_string(y.size()) +
                            " does not match " + std::to_string(a.rows()) + " rows");
    }
    if (a.cols() == 0) return ComplexVector(0);

    Eigen::BDCSVD<ComplexMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RealVector& s = svd.singularValues();
    const double cutoff = kRankCutoff * s(0);

    ComplexVector coeffs = svd.matrixU().adjoint() * y;
    for (Eigen::Index k = 0; k < s.size(); ++k) {
        coeffs(k) = s(k) > cutoff ? coeffs(k) / s(k) : Complex(0.0, 0.0);
    }
    return svd.matrixV() * coeffs;
}

}  // namespace flowdmd
