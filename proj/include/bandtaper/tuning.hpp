#pragma once

#include "bandtaper/bayes.hpp"
#include "bandtaper/estimators.hpp"
#include "bandtaper/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace bandtaper {

enum class MethodFamily {
  kTapering,
  kBlockwise,
  kBanding,
  kTaperingPpp,
  kBlockwisePpp,
  kBandingPpp,
};

bool is_ppp_family(MethodFamily m);
std::string family_name(MethodFamily m);
MethodFamily family_from_name(const std::string& name);

/// One tuning-parameter vector tau. `a` is ignored outside the blockwise
/// families.
struct Candidate {
  int k = 2;
  double a = 0.0;
  double epsilon = 0.0;
};

struct TuningGrid {
  MethodFamily method = MethodFamily::kTapering;
  std::vector<Candidate> candidates;
};

struct CVOptions {
  /// Paper-literal reading of the selection rule: pick the candidate
  /// minimizing the summed log-likelihood instead of maximizing it.
  bool literal_minimize = false;
};

/**
 * Cross-validation outcome. `selected` attains the optimal score; ties are
 * broken by smallest k, then smallest a, then smallest epsilon, then input
 * order. Candidates that failed on some fold carry -inf scores and a
 * diagnostic.
 */
struct CVReport {
  std::vector<Candidate> candidates;
  std::vector<double> scores;
  std::vector<std::vector<double>> fold_scores;  // [candidate][fold]
  std::vector<std::string> diagnostics;
  int selected = -1;
  bool maximized = true;
};

/// log N(y; m, V); throws NumericalError when V is not positive definite.
double gaussian_cond_loglik(const Eigen::VectorXd& y, const Eigen::VectorXd& m,
                            const CovMatrix& v);

/**
 * Frequentist leave-one-out CV: for each candidate, refit the covariance
 * estimator on the data without row i and score Y_i under the induced
 * conditional Gaussian. Blockwise candidates use the tapering conditional
 * variance. The candidate with the largest total log-likelihood wins (see
 * CVOptions::literal_minimize for the literal reading).
 */
CVReport loocv_frequentist(const DataMatrix& z, const Partition& part,
                           const TuningGrid& grid, const CVOptions& opts = {});

/**
 * Bayesian leave-one-out CV over post-processed posterior draws: per fold,
 * draws_per_fold draws from the leave-one-out initial posterior are shared
 * across all candidates; each candidate is scored by the log of the mixture
 * density over its post-processed draws. Draws whose post-processing fails
 * are dropped with a diagnostic (at least one must survive per fold).
 */
CVReport loocv_bayes(const DataMatrix& z, const Partition& part,
                     const IWParams& prior, const TuningGrid& grid,
                     int draws_per_fold, std::uint64_t seed,
                     const CVOptions& opts = {});

}  // namespace bandtaper
