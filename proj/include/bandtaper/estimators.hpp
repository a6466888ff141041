#pragma once

#include "bandtaper/linalg.hpp"
#include "bandtaper/operators.hpp"
#include "bandtaper/types.hpp"

namespace bandtaper {

/**
 * Sample covariance S = (1/n) sum_i z_i z_i^T of the rows of Z. The model
 * convention is mean zero, so no centering happens by default; `center`
 * subtracts column means first (for real data) while keeping the 1/n scale.
 */
CovMatrix sample_covariance(const DataMatrix& z, bool center = false);

/// Conditional mean operator psi(S) = S_YX (S_XX)^{-1}, shape (p-p0) x p0.
/// Throws SingularityError when S_XX is not positive definite.
CoefMatrix cond_mean_operator(const CovMatrix& s, const Partition& part);

/// Conditional variance nu(S) = S_YY - S_YX (S_XX)^{-1} S_XY.
CovMatrix cond_variance(const CovMatrix& s, const Partition& part);

/// psi(T_k^(eps)(S)): conditional mean operator of the PD-adjusted tapered S.
CoefMatrix tapering_estimator(const CovMatrix& s, const TaperParams& params,
                              const Partition& part);

/**
 * Blockwise estimator phi(S; b, eps) = T_k(S)_YX Lambda^(eps){T_k(S)_XX; b}
 * with b = 2*floor(a k log k) (clamped to p0 with a warning when larger).
 * The first p0 - b columns of the result are exactly zero.
 */
CoefMatrix blockwise_estimator(const CovMatrix& s, const BlockwiseParams& params,
                               const Partition& part);

/// psi(B_k^(eps)(S)): banding counterpart of the tapering estimator.
CoefMatrix banding_estimator(const CovMatrix& s, int k, double epsilon,
                             const Partition& part);

/// Spectral-norm loss ||c_hat - c_true||_2; shapes must match.
double loss(const CoefMatrix& c_hat, const CoefMatrix& c_true);

namespace detail {

// Banded pipeline shared by the estimators, the cross-validation folds and
// the post-processed posterior sampler. All take/produce symmetric band
// storage and avoid materializing dense p x p intermediates.

/// Tapered band T_k(S) extracted directly from a dense symmetric matrix.
banded::BandSym taper_band_from_dense(const Eigen::MatrixXd& s, int k);
/// Banded (hard truncation) band B_k(S) from a dense symmetric matrix.
banded::BandSym band_band_from_dense(const Eigen::MatrixXd& s, int k);
/// Apply taper weights to raw covariance band entries (raw.w >= k-1 needed
/// unless the matrix is smaller than the taper support).
banded::BandSym taper_band_from_band(const banded::BandSym& raw, int k);
banded::BandSym band_band_from_band(const banded::BandSym& raw, int k);

/// Shift a band to minimum eigenvalue >= eps; returns the shift applied.
double pd_adjust_band(banded::BandSym& a, double eps);

CoefMatrix cond_mean_banded(const banded::BandSym& a, const Partition& part);
CovMatrix cond_variance_banded(const banded::BandSym& a, const Partition& part);

/// phi computed from an already-tapered band (b already clamped).
CoefMatrix blockwise_from_taper_band(const banded::BandSym& tk, Eigen::Index b,
                                     double eps, const Partition& part);

/// True when the banded pipeline is worthwhile for this size/width.
bool banded_worthwhile(Eigen::Index p, Eigen::Index w);

}  // namespace detail

}  // namespace bandtaper
