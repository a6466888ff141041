#pragma once

#include "bandtaper/bayes.hpp"
#include "bandtaper/estimators.hpp"
#include "bandtaper/rng.hpp"
#include "bandtaper/tuning.hpp"
#include "bandtaper/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bandtaper {

/**
 * Ground-truth covariance: Sigma0* has unit diagonal and rho*|i-j|^{-(alpha+1)}
 * off the diagonal; Sigma0 = Sigma0* + (floor - lambda_min(Sigma0*)) I pins the
 * minimum eigenvalue at `floor` exactly (the shift may be negative).
 */
struct TruthSpec {
  Eigen::Index p = 2;
  double rho = 0.6;
  double alpha = 0.1;
  double floor = 0.5;
};

CovMatrix make_sigma0(const TruthSpec& spec);

/// n i.i.d. rows from N_p(0, Sigma0) via the Cholesky factor; row-major
/// variate consumption, deterministic per stream.
DataMatrix sample_gaussian(const CovMatrix& sigma0, Eigen::Index n,
                           CounterRng& rng);
DataMatrix sample_gaussian(const CovMatrix& sigma0, Eigen::Index n,
                           std::uint64_t seed);

/// mean / population standard deviation (divisor T). Zero variance yields the
/// degenerate marker instead of a NaN.
struct TValue {
  std::optional<double> value;
  bool degenerate() const { return !value.has_value(); }
};
TValue t_value(const std::vector<double>& d);

/// Least-squares slope of log(y) against log(x).
double log_log_slope(const std::vector<double>& xs, const std::vector<double>& ys);

/// One estimator row of a study: either a fixed parameter set or a
/// cross-validated grid (frequentist LOOCV for point estimators, Bayesian
/// LOOCV for the PPP families).
struct MethodSpec {
  MethodFamily family = MethodFamily::kTapering;
  bool tuned = false;
  Candidate fixed;
  std::vector<Candidate> grid;

  std::string label() const;
};

struct StudyConfig {
  Eigen::Index p = 60;
  double rho = 0.6;
  double floor = 0.5;
  std::vector<double> alphas = {0.1};
  std::vector<Eigen::Index> ns = {30};
  Eigen::Index p0 = 48;
  int reps = 10;
  std::uint64_t seed = 1;
  std::vector<MethodSpec> methods;
  int ppp_draws = 1000;   // N posterior draws for PPP point estimates
  int fold_draws = 50;    // S draws per fold in Bayesian LOOCV
  bool literal_minimize = false;
};

struct RiskCell {
  Eigen::Index n = 0;
  double alpha = 0.0;
  std::string method;
  int reps = 0;
  double mean_loss = 0.0;
  double sd_loss = 0.0;
  std::vector<double> losses;
  std::vector<std::string> failures;  // nonempty marks the cell incomplete
};

struct StudyReport {
  std::uint64_t seed = 0;
  std::vector<RiskCell> cells;
  double wall_seconds = 0.0;  // surfaced in the manifest, not the report file
};

/// Monte-Carlo risk study: for every (n, alpha) cell and method, the mean
/// spectral-norm loss against psi(Sigma0) over `reps` seeded replications.
/// Bit-reproducible for a fixed seed at any thread count.
StudyReport risk_mc(const StudyConfig& cfg);

/**
 * Paired comparison of two estimator families on shared data: per (k, a) cell
 * the error reductions d = loss(A) - loss(B) and their t-values, for the
 * frequentist point estimators and/or the posterior means of the matching
 * PPPs (which share one initial-draw sequence per replication).
 */
struct CompareConfig {
  TruthSpec truth{500, 0.6, 0.1, 0.5};
  Eigen::Index n = 250;
  Eigen::Index p0 = 400;
  int reps = 100;
  double epsilon = 0.5;
  std::uint64_t seed = 1;
  std::vector<int> k_grid = {2};
  std::vector<double> a_grid = {5.0};
  bool frequentist = true;
  bool bayes = true;
  int ppp_draws = 1000;
  MethodFamily method_a = MethodFamily::kTapering;
  MethodFamily method_b = MethodFamily::kBlockwise;
};

struct CompareCell {
  int k = 0;
  double a = 0.0;
  std::vector<double> d_f, d_b;
  TValue t_f, t_b;
  double mean_d_f = 0.0, mean_d_b = 0.0;
};

struct CompareReport {
  std::uint64_t seed = 0;
  std::vector<CompareCell> cells;
  double wall_seconds = 0.0;
};

CompareReport compare_study(const CompareConfig& cfg);

/**
 * Convergence-rate diagnostic: for each n, k = ceil(n^{1/(2 alpha + 1)}),
 * p = 2n, p0 = floor(0.8 p); the blockwise estimator's mean squared loss is
 * estimated by Monte Carlo and the log-log slope against n is fitted.
 */
struct RateConfig {
  double alpha = 0.5;
  std::vector<Eigen::Index> n_list = {100, 200, 400, 800};
  int reps = 30;
  std::uint64_t seed = 1;
  double a = 1.0;
  double rho = 0.6;
  double fixed_epsilon = -1.0;  // < 0: epsilon_n = min(0.5, sqrt(k/n))
};

struct RatePoint {
  Eigen::Index n = 0, p = 0, p0 = 0;
  int k = 0;
  double epsilon = 0.0;
  double mean_sq_loss = 0.0;
};

struct RateReport {
  std::uint64_t seed = 0;
  double alpha = 0.0;
  std::vector<RatePoint> points;
  double slope = 0.0;
  double wall_seconds = 0.0;
};

RateReport rate_study(const RateConfig& cfg);

/**
 * Precision-decay diagnostic: with W = Sigma0^{-1}, the largest column tail
 * sum max_j sum { |w_ij| : |i-j| > a k log k }. Returns 0 with a warning when
 * the offset reaches the dimension.
 */
double precision_decay(const CovMatrix& sigma0, int k, double a);

namespace detail {
/// Point estimate for a frequentist family (no conditional variance).
CoefMatrix fit_point(MethodFamily fam, const Candidate& cand, const CovMatrix& s,
                     const Partition& part);
/// Monte-Carlo mean loss of an arbitrary fit against a fixed truth; the
/// replication -> substream mapping matches risk_mc.
std::vector<double> mc_losses(
    const CovMatrix& sigma0, Eigen::Index n, const CoefMatrix& truth,
    const Partition& part, int reps, std::uint64_t seed, std::uint64_t cell_tag,
    const std::function<CoefMatrix(const DataMatrix&, std::uint64_t)>& fit);
}  // namespace detail

}  // namespace bandtaper
