#pragma once

#include "bandtaper/linalg.hpp"
#include "bandtaper/types.hpp"

namespace bandtaper {

/// Bandwidth k and positive-definite adjustment level epsilon for the
/// adjusted tapering (and banding) estimators.
struct TaperParams {
  int k = 1;
  double epsilon = 0.0;

  TaperParams(int k_, double epsilon_) : k(k_), epsilon(epsilon_) {
    if (k < 1) throw InputError("TaperParams: k must be >= 1");
    if (!(epsilon >= 0.0)) throw InputError("TaperParams: epsilon must be >= 0");
  }
};

/**
 * Parameters of the blockwise estimator. The active trailing-block size is
 * b = 2 * floor(a * k * log k) with the natural logarithm; k >= 2 so that
 * log k > 0, and (k, a) must give b >= 1. When b exceeds the covariate
 * dimension p0 it is clamped to p0 at the point of use, with a warning.
 */
struct BlockwiseParams {
  int k = 2;
  double a = 1.0;
  double epsilon = 0.0;

  BlockwiseParams(int k_, double a_, double epsilon_)
      : k(k_), a(a_), epsilon(epsilon_) {
    if (k < 2) throw InputError("BlockwiseParams: k must be >= 2");
    if (!(a > 0.0)) throw InputError("BlockwiseParams: a must be > 0");
    if (!(epsilon >= 0.0)) throw InputError("BlockwiseParams: epsilon must be >= 0");
    if (block_size() < 1) {
      throw InputError("BlockwiseParams: 2*floor(a*k*log(k)) must be >= 1");
    }
  }

  /// Unclamped b = 2 * floor(a * k * ln k).
  Eigen::Index block_size() const {
    return 2 * static_cast<Eigen::Index>(
                   std::floor(a * k * std::log(static_cast<double>(k))));
  }

  /// b clamped to the covariate dimension, warning when the clamp fires.
  Eigen::Index block_size_clamped(Eigen::Index p0) const;
};

/**
 * Trapezoidal tapering weight for 1-based indices i, j and bandwidth k:
 * 1 when |i-j| <= k/2, the linear ramp 2 - |i-j|/(k/2) when k/2 < |i-j| < k,
 * and 0 otherwise. k/2 is taken literally (not floored); the boundary
 * |i-j| == k/2 for even k falls in the weight-1 branch.
 */
double taper_weight(Eigen::Index i, Eigen::Index j, int k);

/// Entrywise tapering T_k: entries with |i-j| >= k become exactly zero.
CovMatrix taper(const CovMatrix& s, int k);

/// Hard banding B_k: entries with |i-j| > k become exactly zero. k >= 0.
CovMatrix band(const CovMatrix& s, int k);

/**
 * Positive-definite adjustment A + ([epsilon - lambda_min(A)] v 0) I.
 * Returns A unchanged (bit-exact) when lambda_min(A) >= epsilon.
 */
CovMatrix pd_adjust(const CovMatrix& a, double epsilon);

/**
 * Principal sub-block over 1-based positions (l v 1) .. ((l+k-1) ^ q); l may
 * be any integer, k >= 1. Throws InputError when the clipped range is empty.
 */
CovMatrix sub_block(const CovMatrix& s, Eigen::Index l, Eigen::Index k);

/**
 * Same sub-block kept in place inside a q x q matrix of zeros; an empty clip
 * range yields the zero matrix (this variant participates in sums over l).
 */
CovMatrix sub_block_embedded(const CovMatrix& s, Eigen::Index l, Eigen::Index k);

/**
 * Blockwise inverse operator on a p0 x p0 matrix A: zero everywhere except
 * the bottom-right b x b block, which is the inverse of the PD-adjusted
 * trailing b x b block of A. Requires 1 <= b <= p0.
 */
CovMatrix lambda_op(const CovMatrix& a, Eigen::Index b, double epsilon);

}  // namespace bandtaper
