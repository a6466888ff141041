#include "bandtaper/tuning.hpp"

#include "bandtaper/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>

namespace bandtaper {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logsumexp(const std::vector<double>& xs) {
  double m = kNegInf;
  for (const double x : xs) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (const double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

/// Point fit (coefficient + conditional variance) for a frequentist family
/// from a covariance input; PPP families reuse it per posterior draw.
struct Fit {
  CoefMatrix c;
  CovMatrix v = CovMatrix::identity(1);
};

Fit fit_from_cov(const CovMatrix& s, MethodFamily fam, const Candidate& cand,
                 const Partition& part) {
  switch (fam) {
    case MethodFamily::kTapering:
    case MethodFamily::kTaperingPpp: {
      const CovMatrix adj = pd_adjust(taper(s, cand.k), cand.epsilon);
      return {cond_mean_operator(adj, part), cond_variance(adj, part)};
    }
    case MethodFamily::kBlockwise:
    case MethodFamily::kBlockwisePpp: {
      // The blockwise estimator has no conditional variance of its own; the
      // tapering one is used.
      const CovMatrix adj = pd_adjust(taper(s, cand.k), cand.epsilon);
      return {blockwise_estimator(s, BlockwiseParams(cand.k, cand.a, cand.epsilon),
                                  part),
              cond_variance(adj, part)};
    }
    case MethodFamily::kBanding:
    case MethodFamily::kBandingPpp: {
      const CovMatrix adj = pd_adjust(band(s, cand.k), cand.epsilon);
      return {cond_mean_operator(adj, part), cond_variance(adj, part)};
    }
  }
  throw InputError("fit_from_cov: unknown method family");
}

int select_candidate(const std::vector<Candidate>& cands,
                     const std::vector<double>& scores, bool maximize) {
  int best = -1;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (std::isnan(scores[i])) continue;
    if (best < 0) {
      best = static_cast<int>(i);
      continue;
    }
    const double cur = scores[i], opt = scores[best];
    const bool better = maximize ? cur > opt : cur < opt;
    if (better) {
      best = static_cast<int>(i);
    } else if (cur == opt) {
      const auto key = [](const Candidate& c) {
        return std::make_tuple(c.k, c.a, c.epsilon);
      };
      if (key(cands[i]) < key(cands[best])) best = static_cast<int>(i);
    }
  }
  if (best < 0) {
    throw NumericalError("cross-validation: every candidate failed");
  }
  return best;
}

void validate_common(const DataMatrix& z, const Partition& part,
                     const TuningGrid& grid) {
  if (z.rows() < 2) throw InputError("loocv: need n >= 2 rows");
  if (z.cols() != part.p) throw InputError("loocv: data columns != partition p");
  if (grid.candidates.empty()) throw InputError("loocv: empty candidate grid");
}

DataMatrix drop_row(const DataMatrix& z, Eigen::Index i) {
  DataMatrix out(z.rows() - 1, z.cols());
  out.topRows(i) = z.topRows(i);
  out.bottomRows(z.rows() - 1 - i) = z.bottomRows(z.rows() - 1 - i);
  return out;
}

}  // namespace

bool is_ppp_family(MethodFamily m) {
  return m == MethodFamily::kTaperingPpp || m == MethodFamily::kBlockwisePpp ||
         m == MethodFamily::kBandingPpp;
}

std::string family_name(MethodFamily m) {
  switch (m) {
    case MethodFamily::kTapering: return "tapering";
    case MethodFamily::kBlockwise: return "blockwise";
    case MethodFamily::kBanding: return "banding";
    case MethodFamily::kTaperingPpp: return "tapering-ppp";
    case MethodFamily::kBlockwisePpp: return "blockwise-ppp";
    case MethodFamily::kBandingPpp: return "banding-ppp";
  }
  return "unknown";
}

MethodFamily family_from_name(const std::string& name) {
  if (name == "tapering") return MethodFamily::kTapering;
  if (name == "blockwise") return MethodFamily::kBlockwise;
  if (name == "banding") return MethodFamily::kBanding;
  if (name == "tapering-ppp") return MethodFamily::kTaperingPpp;
  if (name == "blockwise-ppp") return MethodFamily::kBlockwisePpp;
  if (name == "banding-ppp") return MethodFamily::kBandingPpp;
  throw InputError("unknown method family: " + name);
}

double gaussian_cond_loglik(const Eigen::VectorXd& y, const Eigen::VectorXd& m,
                            const CovMatrix& v) {
  const Eigen::Index q = v.dim();
  if (y.size() != q || m.size() != q) {
    throw InputError("gaussian_cond_loglik: dimension mismatch");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(v.mat());
  if (llt.info() != Eigen::Success) {
    throw NumericalError("gaussian_cond_loglik: covariance not positive definite");
  }
  const double logdet =
      2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const double quad =
      llt.matrixL().solve(y - m).squaredNorm();
  return -0.5 * (static_cast<double>(q) * std::log(2.0 * std::numbers::pi) +
                 logdet + quad);
}

CVReport loocv_frequentist(const DataMatrix& z, const Partition& part,
                           const TuningGrid& grid, const CVOptions& opts) {
  validate_common(z, part, grid);
  if (is_ppp_family(grid.method)) {
    throw InputError("loocv_frequentist: grid method is a PPP family");
  }
  const Eigen::Index n = z.rows();
  const std::size_t nc = grid.candidates.size();

  // n * S_n; the leave-one-out covariance is (M - z_i z_i^T)/(n - 1).
  Eigen::MatrixXd m_full = Eigen::MatrixXd::Zero(part.p, part.p);
  m_full.selfadjointView<Eigen::Lower>().rankUpdate(z.transpose(), 1.0);
  m_full.triangularView<Eigen::StrictlyUpper>() = m_full.transpose();

  CVReport rep;
  rep.candidates = grid.candidates;
  rep.scores.assign(nc, 0.0);
  rep.fold_scores.assign(nc, std::vector<double>(n, 0.0));
  rep.maximized = !opts.literal_minimize;
  std::mutex diag_mutex;

  parallel_for(static_cast<std::int64_t>(nc) * n, [&](std::int64_t idx) {
    const std::size_t c = static_cast<std::size_t>(idx / n);
    const Eigen::Index i = static_cast<Eigen::Index>(idx % n);
    const Eigen::VectorXd zi = z.row(i);
    Eigen::MatrixXd sm = (m_full - zi * zi.transpose()) /
                         static_cast<double>(n - 1);
    const CovMatrix s_minus = CovMatrix::from_symmetric(std::move(sm));
    double ll;
    try {
      const Fit fit = fit_from_cov(s_minus, grid.method, grid.candidates[c], part);
      const Eigen::VectorXd x = zi.head(part.p0);
      const Eigen::VectorXd y = zi.tail(part.q());
      ll = gaussian_cond_loglik(y, fit.c * x, fit.v);
    } catch (const std::exception& e) {
      ll = kNegInf;
      std::lock_guard<std::mutex> lock(diag_mutex);
      rep.diagnostics.push_back("candidate " + std::to_string(c) + ", fold " +
                                std::to_string(i) + ": " + e.what());
    }
    rep.fold_scores[c][i] = ll;
  });

  for (std::size_t c = 0; c < nc; ++c) {
    double total = 0.0;
    for (const double v : rep.fold_scores[c]) total += v;
    rep.scores[c] = total;
  }
  std::sort(rep.diagnostics.begin(), rep.diagnostics.end());
  rep.selected = select_candidate(rep.candidates, rep.scores, rep.maximized);
  return rep;
}

CVReport loocv_bayes(const DataMatrix& z, const Partition& part,
                     const IWParams& prior, const TuningGrid& grid,
                     int draws_per_fold, std::uint64_t seed,
                     const CVOptions& opts) {
  validate_common(z, part, grid);
  if (!is_ppp_family(grid.method)) {
    throw InputError("loocv_bayes: grid method is not a PPP family");
  }
  if (draws_per_fold < 1) throw InputError("loocv_bayes: draws_per_fold >= 1");
  if (prior.dim() != part.p) throw InputError("loocv_bayes: prior dim != p");
  const Eigen::Index n = z.rows();
  const std::size_t nc = grid.candidates.size();

  CVReport rep;
  rep.candidates = grid.candidates;
  rep.scores.assign(nc, 0.0);
  rep.fold_scores.assign(nc, std::vector<double>(n, 0.0));
  rep.maximized = !opts.literal_minimize;
  std::mutex diag_mutex;

  parallel_for(n, [&](std::int64_t i) {
    const Eigen::VectorXd zi = z.row(i);
    const Eigen::VectorXd x = zi.head(part.p0);
    const Eigen::VectorXd y = zi.tail(part.q());
    const IWParams post = iw_posterior(prior, drop_row(z, i));
    const IwSampler sampler(post);

    // Fold draws are generated once and reused across candidates.
    std::vector<CovMatrix> draws;
    draws.reserve(draws_per_fold);
    for (int s = 0; s < draws_per_fold; ++s) {
      CounterRng rng(seed, derive_stream({stream_tag::kFoldDraw,
                                          static_cast<std::uint64_t>(i),
                                          static_cast<std::uint64_t>(s)}));
      draws.push_back(sampler.sample(rng));
    }

    for (std::size_t c = 0; c < nc; ++c) {
      std::vector<double> lls;
      lls.reserve(draws.size());
      int dropped = 0;
      for (std::size_t s = 0; s < draws.size(); ++s) {
        try {
          const Fit fit =
              fit_from_cov(draws[s], grid.method, grid.candidates[c], part);
          lls.push_back(gaussian_cond_loglik(y, fit.c * x, fit.v));
        } catch (const std::exception& e) {
          ++dropped;
          std::lock_guard<std::mutex> lock(diag_mutex);
          rep.diagnostics.push_back("candidate " + std::to_string(c) +
                                    ", fold " + std::to_string(i) + ", draw " +
                                    std::to_string(s) + " dropped: " + e.what());
        }
      }
      double score;
      if (lls.empty()) {
        score = kNegInf;
        std::lock_guard<std::mutex> lock(diag_mutex);
        rep.diagnostics.push_back("candidate " + std::to_string(c) + ", fold " +
                                  std::to_string(i) + ": no surviving draws");
      } else {
        score = logsumexp(lls) - std::log(static_cast<double>(lls.size()));
      }
      rep.fold_scores[c][i] = score;
    }
  });

  for (std::size_t c = 0; c < nc; ++c) {
    double total = 0.0;
    for (const double v : rep.fold_scores[c]) total += v;
    rep.scores[c] = total;
  }
  std::sort(rep.diagnostics.begin(), rep.diagnostics.end());
  rep.selected = select_candidate(rep.candidates, rep.scores, rep.maximized);
  return rep;
}

}  // namespace bandtaper
