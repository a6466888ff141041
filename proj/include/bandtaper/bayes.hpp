#pragma once

#include "bandtaper/estimators.hpp"
#include "bandtaper/rng.hpp"
#include "bandtaper/types.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace bandtaper {

/**
 * Inverse-Wishart parameters in the density convention
 *   pi(Sigma) proportional to |Sigma|^{-df/2} exp(-tr(Sigma^{-1} scale)/2),
 * which requires df > 2*dim. Under this convention the precision matrix is
 * Wishart with df - dim - 1 degrees of freedom and scale^{-1} as scale.
 */
struct IWParams {
  CovMatrix scale;
  double df;

  IWParams(CovMatrix scale_, double df_);

  /// B0 = I_p, nu0 = 2p + 3: proper with minimal information.
  static IWParams default_prior(Eigen::Index p);

  Eigen::Index dim() const { return scale.dim(); }
};

/// Ordered post-processed posterior sample with its generation seed.
struct PosteriorDraws {
  std::vector<CoefMatrix> draws;
  std::uint64_t seed = 0;

  Eigen::Index count() const { return static_cast<Eigen::Index>(draws.size()); }
};

/// Conjugate update: IW(B0, nu0) + n observations -> IW(B0 + n S_n, nu0 + n).
IWParams iw_posterior(const IWParams& prior, const DataMatrix& z);

/// One Wishart draw, E[W] = df * scale, via the Bartlett decomposition.
/// Requires df > dim - 1 and positive definite scale.
CovMatrix wishart_sample(const CovMatrix& scale, double df, CounterRng& rng);

/// One draw from IW(scale, df) in the convention above (df > 2*dim).
CovMatrix iw_sample(const IWParams& params, CounterRng& rng);

using PostFn = std::function<CoefMatrix(const CovMatrix&)>;

/**
 * Post-processed posterior: n_draws initial-posterior draws, each mapped
 * through post_fn. Draw i uses its own derived substream of `seed`, so the
 * sequence is identical for any thread count. post_fn failures carry the
 * draw index.
 */
PosteriorDraws ppp(const IWParams& params, const PostFn& post_fn, int n_draws,
                   std::uint64_t seed);

/// Elementwise average of the draws.
CoefMatrix posterior_mean(const PosteriorDraws& d);

/// Monte-Carlo posterior-expected squared loss against a fixed target.
double p_loss(const PosteriorDraws& d, const CoefMatrix& c_true);

/**
 * One of the paper-family post-processing maps (tapering / blockwise /
 * banding), bound to a partition. These are the transforms the fast draw
 * pipeline understands: each only reads a band of the drawn covariance.
 */
struct PppTransform {
  enum class Family { kTapering, kBlockwise, kBanding };

  Family family;
  int k;
  double a;  // blockwise only
  double epsilon;
  Partition part;

  static PppTransform tapering(int k, double epsilon, const Partition& part);
  static PppTransform blockwise(int k, double a, double epsilon,
                                const Partition& part);
  static PppTransform banding(int k, double epsilon, const Partition& part);

  /// Band of the draw this transform needs (k-1 for tapering family, k for banding).
  Eigen::Index band_requirement() const;

  CoefMatrix apply(const CovMatrix& sigma) const;
  CoefMatrix apply_band(const banded::BandSym& sigma_band) const;
};

/**
 * Posterior means of several transforms of the same initial posterior,
 * sharing one draw sequence (the initial-sampling step is common; only the
 * post-processing differs). Streams the draws, keeping memory at O(p^2); when
 * every transform is band-limited and the band is narrow relative to p, only
 * the needed band of each draw is formed. Deterministic for any thread count.
 */
std::vector<CoefMatrix> ppp_means(const IWParams& params,
                                  const std::vector<PppTransform>& transforms,
                                  int n_draws, std::uint64_t seed);

/// Cached factorization for repeated draws from one inverse-Wishart.
class IwSampler {
 public:
  explicit IwSampler(const IWParams& params);

  Eigen::Index dim() const { return lb_.rows(); }

  CovMatrix sample(CounterRng& rng) const;
  /// Only the band |i-j| <= w of the draw (same draw as sample() for the
  /// same stream position, up to floating-point summation order).
  banded::BandSym sample_band(CounterRng& rng, Eigen::Index w) const;

 private:
  Eigen::MatrixXd inverse_chol_factor(CounterRng& rng) const;

  double wdf_;
  Eigen::MatrixXd lb_;  // lower Cholesky factor of scale^{-1}
};

}  // namespace bandtaper
