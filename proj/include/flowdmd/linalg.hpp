// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace flowdmd {

using Complex = std::complex<double>;
using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;

/// Singular values below this fraction of the largest are treated as zero.
inline constexpr double kRankCutoff = 1e-12;

struct SvdFactors {
    RealMatrix u;          ///< n x r, orthonormal columns
    RealVector sigma;      ///< length r, nonincreasing
    RealMatrix v;          ///< m x r, orthonormal columns
    std::size_t effective_rank = 0;  ///< count of sigma_i > kRankCutoff * sigma_0
};

/// Leading `max_rank` singular triplets of `x`.
///
/// Throws IngestionDefectError on non-finite entries and ArgumentError when
/// `max_rank` is outside [1, min(rows, cols)].
SvdFactors reduced_svd(const RealMatrix& x, std::size_t max_rank);

struct EigenDecomposition {
    ComplexVector values;
    ComplexMatrix vectors;  ///< unit 2-norm columns
    double residual = 0.0;  ///< max-abs of a*W - W*diag(values)
};

/// Eigendecomposition of a small dense real matrix.
///
/// Each eigenvector is scaled to unit 2-norm and rotated so that its
/// first entry of largest magnitude is real and positive. Complex
/// eigenvalues of a real input come out in exact conjugate pairs.
EigenDecomposition eig_dense(const RealMatrix& a);

/// Minimum-norm least-squares solution of a*b = y through the SVD
/// pseudoinverse, discarding singular values below kRankCutoff * sigma_0.
ComplexVector least_squares(const ComplexMatrix& a, const ComplexVector& y);

bool all_finite(const RealMatrix& x);

}  // namespace flowdmd
