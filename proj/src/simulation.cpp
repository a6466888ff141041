#include "bandtaper/simulation.hpp"

#include "bandtaper/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>

namespace bandtaper {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Eigen::MatrixXd chol_factor(const CovMatrix& sigma) {
  Eigen::LLT<Eigen::MatrixXd> llt(sigma.mat());
  if (llt.info() != Eigen::Success) {
    throw NumericalError("sample_gaussian: covariance is not positive definite");
  }
  return llt.matrixL();
}

}  // namespace

CovMatrix make_sigma0(const TruthSpec& spec) {
  if (spec.p < 2) throw InputError("make_sigma0: p must be >= 2");
  if (!(spec.alpha > 0.0)) throw InputError("make_sigma0: alpha must be > 0");
  Eigen::MatrixXd s(spec.p, spec.p);
  for (Eigen::Index j = 0; j < spec.p; ++j) {
    s(j, j) = 1.0;
    for (Eigen::Index i = j + 1; i < spec.p; ++i) {
      const double v =
          spec.rho * std::pow(static_cast<double>(i - j), -(spec.alpha + 1.0));
      s(i, j) = v;
      s(j, i) = v;
    }
  }
  const double lmin = sym_eigen_min(CovMatrix::from_symmetric(s));
  s.diagonal().array() += spec.floor - lmin;
  return CovMatrix::from_symmetric(std::move(s));
}

DataMatrix sample_gaussian(const CovMatrix& sigma0, Eigen::Index n,
                           CounterRng& rng) {
  const Eigen::Index p = sigma0.dim();
  if (n < 0) throw InputError("sample_gaussian: n must be >= 0");
  if (n == 0) return DataMatrix(0, p);
  const Eigen::MatrixXd l = chol_factor(sigma0);
  DataMatrix g(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) g(i, j) = rng.normal();
  }
  DataMatrix z(n, p);
  z.noalias() = g * l.transpose();
  return z;
}

DataMatrix sample_gaussian(const CovMatrix& sigma0, Eigen::Index n,
                           std::uint64_t seed) {
  CounterRng rng(seed, derive_stream({stream_tag::kDataGen}));
  return sample_gaussian(sigma0, n, rng);
}

TValue t_value(const std::vector<double>& d) {
  const std::size_t t = d.size();
  if (t < 2) throw InputError("t_value: need at least 2 values");
  double mean = 0.0;
  for (const double v : d) mean += v;
  mean /= static_cast<double>(t);
  double ss = 0.0;
  for (const double v : d) ss += (v - mean) * (v - mean);
  const double var = ss / static_cast<double>(t);
  if (var == 0.0) return TValue{std::nullopt};
  return TValue{mean / std::sqrt(var)};
}

double log_log_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw InputError("log_log_slope: need matching sequences of length >= 2");
  }
  const std::size_t n = xs.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) {
      throw InputError("log_log_slope: values must be positive");
    }
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (sxx == 0.0) throw InputError("log_log_slope: degenerate x sequence");
  return sxy / sxx;
}

std::string MethodSpec::label() const {
  std::string s = family_name(family);
  if (tuned) {
    s += ":loocv";
  } else {
    s += ":k=" + std::to_string(fixed.k);
    if (family == MethodFamily::kBlockwise ||
        family == MethodFamily::kBlockwisePpp) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), ",a=%g", fixed.a);
      s += buf;
    }
  }
  return s;
}

namespace detail {

CoefMatrix fit_point(MethodFamily fam, const Candidate& cand, const CovMatrix& s,
                     const Partition& part) {
  switch (fam) {
    case MethodFamily::kTapering:
      return tapering_estimator(s, TaperParams(cand.k, cand.epsilon), part);
    case MethodFamily::kBlockwise:
      return blockwise_estimator(
          s, BlockwiseParams(cand.k, cand.a, cand.epsilon), part);
    case MethodFamily::kBanding:
      return banding_estimator(s, cand.k, cand.epsilon, part);
    default:
      throw InputError("fit_point: not a frequentist point-estimator family");
  }
}

std::vector<double> mc_losses(
    const CovMatrix& sigma0, Eigen::Index n, const CoefMatrix& truth,
    const Partition& part, int reps, std::uint64_t seed, std::uint64_t cell_tag,
    const std::function<CoefMatrix(const DataMatrix&, std::uint64_t)>& fit) {
  const Eigen::MatrixXd l = chol_factor(sigma0);
  std::vector<double> losses(reps);
  parallel_for(reps, [&](std::int64_t r) {
    CounterRng rng(seed, derive_stream({stream_tag::kStudy, cell_tag,
                                        static_cast<std::uint64_t>(r)}));
    DataMatrix g(n, sigma0.dim());
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < sigma0.dim(); ++j) g(i, j) = rng.normal();
    }
    const DataMatrix z = g * l.transpose();
    const CoefMatrix c = fit(z, static_cast<std::uint64_t>(r));
    losses[r] = loss(c, truth);
  });
  return losses;
}

}  // namespace detail

namespace {

/// Tuned or fixed point estimate plus the PPP handling shared by risk_mc.
struct CellContext {
  const StudyConfig& cfg;
  Partition part;
  const CovMatrix& sigma0;
  const CoefMatrix& truth;
  Eigen::Index n;
  std::uint64_t cell_tag;
};

Candidate choose_candidate(const MethodSpec& m, const DataMatrix& z,
                           const Partition& part, const StudyConfig& cfg,
                           std::uint64_t fold_seed) {
  if (!m.tuned) return m.fixed;
  TuningGrid grid{m.family, m.grid};
  CVOptions opts;
  opts.literal_minimize = cfg.literal_minimize;
  if (is_ppp_family(m.family)) {
    const CVReport rep = loocv_bayes(z, part, IWParams::default_prior(part.p),
                                     grid, cfg.fold_draws, fold_seed, opts);
    return rep.candidates[rep.selected];
  }
  const CVReport rep = loocv_frequentist(z, part, grid, opts);
  return rep.candidates[rep.selected];
}

PppTransform transform_for(MethodFamily fam, const Candidate& cand,
                           const Partition& part) {
  switch (fam) {
    case MethodFamily::kTaperingPpp:
      return PppTransform::tapering(cand.k, cand.epsilon, part);
    case MethodFamily::kBlockwisePpp:
      return PppTransform::blockwise(cand.k, cand.a, cand.epsilon, part);
    case MethodFamily::kBandingPpp:
      return PppTransform::banding(cand.k, cand.epsilon, part);
    default:
      throw InputError("transform_for: not a PPP family");
  }
}

}  // namespace

StudyReport risk_mc(const StudyConfig& cfg) {
  const auto t0 = Clock::now();
  if (cfg.reps < 1) throw InputError("risk_mc: reps must be >= 1");
  if (cfg.methods.empty()) throw InputError("risk_mc: no methods configured");
  const Partition part(cfg.p, cfg.p0);

  StudyReport report;
  report.seed = cfg.seed;

  std::uint64_t cell_index = 0;
  for (const double alpha : cfg.alphas) {
    const CovMatrix sigma0 = make_sigma0({cfg.p, cfg.rho, alpha, cfg.floor});
    const CoefMatrix truth = cond_mean_operator(sigma0, part);
    const Eigen::MatrixXd l = chol_factor(sigma0);
    for (const Eigen::Index n : cfg.ns) {
      const std::uint64_t cell_tag = cell_index++;
      // Replication r sees identical data across all methods.
      std::vector<std::vector<double>> losses(
          cfg.methods.size(), std::vector<double>(cfg.reps, 0.0));
      std::vector<std::vector<std::string>> failures(cfg.methods.size());
      std::mutex fail_mutex;

      parallel_for(cfg.reps, [&](std::int64_t r) {
        CounterRng rng(cfg.seed,
                       derive_stream({stream_tag::kStudy, cell_tag,
                                      static_cast<std::uint64_t>(r)}));
        DataMatrix g(n, cfg.p);
        for (Eigen::Index i = 0; i < n; ++i) {
          for (Eigen::Index j = 0; j < cfg.p; ++j) g(i, j) = rng.normal();
        }
        const DataMatrix z = g * l.transpose();
        const CovMatrix s = sample_covariance(z);

        // PPP methods share one initial-draw sequence per replication.
        std::vector<std::size_t> ppp_methods;
        std::vector<PppTransform> ppp_transforms;

        for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
          const MethodSpec& spec = cfg.methods[m];
          try {
            const Candidate cand = choose_candidate(
                spec, z, part, cfg,
                derive_stream({stream_tag::kFoldDraw, cell_tag,
                               static_cast<std::uint64_t>(r),
                               static_cast<std::uint64_t>(m)}));
            if (is_ppp_family(spec.family)) {
              ppp_methods.push_back(m);
              ppp_transforms.push_back(transform_for(spec.family, cand, part));
            } else {
              losses[m][r] = loss(detail::fit_point(spec.family, cand, s, part),
                                  truth);
            }
          } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(fail_mutex);
            failures[m].push_back("rep " + std::to_string(r) + ": " + e.what());
          }
        }

        if (!ppp_methods.empty()) {
          try {
            const IWParams post =
                iw_posterior(IWParams::default_prior(cfg.p), z);
            const auto means = ppp_means(
                post, ppp_transforms, cfg.ppp_draws,
                derive_stream({cfg.seed, stream_tag::kPosterior, cell_tag,
                               static_cast<std::uint64_t>(r)}));
            for (std::size_t t = 0; t < ppp_methods.size(); ++t) {
              losses[ppp_methods[t]][r] = loss(means[t], truth);
            }
          } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(fail_mutex);
            for (const std::size_t m : ppp_methods) {
              failures[m].push_back("rep " + std::to_string(r) + ": " + e.what());
            }
          }
        }
      });

      for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
        RiskCell cell;
        cell.n = n;
        cell.alpha = alpha;
        cell.method = cfg.methods[m].label();
        cell.reps = cfg.reps;
        cell.losses = losses[m];
        std::sort(failures[m].begin(), failures[m].end());
        cell.failures = failures[m];
        double mean = 0.0;
        for (const double v : cell.losses) mean += v;
        mean /= static_cast<double>(cfg.reps);
        double ss = 0.0;
        for (const double v : cell.losses) ss += (v - mean) * (v - mean);
        cell.mean_loss = mean;
        cell.sd_loss = std::sqrt(ss / static_cast<double>(cfg.reps));
        report.cells.push_back(std::move(cell));
      }
    }
  }
  report.wall_seconds = seconds_since(t0);
  return report;
}

CompareReport compare_study(const CompareConfig& cfg) {
  const auto t0 = Clock::now();
  if (cfg.reps < 2) throw InputError("compare_study: reps must be >= 2");
  if (cfg.k_grid.empty() || cfg.a_grid.empty()) {
    throw InputError("compare_study: empty (k, a) grid");
  }
  if (!cfg.frequentist && !cfg.bayes) {
    throw InputError("compare_study: nothing to compare");
  }
  if (is_ppp_family(cfg.method_a) || is_ppp_family(cfg.method_b)) {
    throw InputError("compare_study: configure point-estimator families; the "
                     "Bayesian side uses their matching PPPs");
  }
  TruthSpec truth_spec = cfg.truth;
  const Partition part(truth_spec.p, cfg.p0);
  const CovMatrix sigma0 = make_sigma0(truth_spec);
  const CoefMatrix truth = cond_mean_operator(sigma0, part);
  const Eigen::MatrixXd l = chol_factor(sigma0);

  const std::size_t n_cells = cfg.k_grid.size() * cfg.a_grid.size();

  // Deduplicated transform list shared across cells (the tapering transform
  // does not depend on a) plus per-cell indices into it.
  MethodFamily ppp_a = MethodFamily::kTapering, ppp_b = ppp_a;
  std::vector<PppTransform> transforms;
  std::vector<std::pair<std::size_t, std::size_t>> cell_transform_idx(n_cells);
  auto ppp_of = [](MethodFamily fam) {
    switch (fam) {
      case MethodFamily::kTapering: return MethodFamily::kTaperingPpp;
      case MethodFamily::kBlockwise: return MethodFamily::kBlockwisePpp;
      case MethodFamily::kBanding: return MethodFamily::kBandingPpp;
      default: throw InputError("compare_study: unsupported family");
    }
  };
  if (cfg.bayes) {
    ppp_a = ppp_of(cfg.method_a);
    ppp_b = ppp_of(cfg.method_b);
    std::map<std::tuple<int, int, double>, std::size_t> seen;  // (fam,k,a)
    auto intern = [&](MethodFamily fam, const Candidate& cand) {
      const bool uses_a = fam == MethodFamily::kBlockwisePpp;
      const auto key = std::make_tuple(static_cast<int>(fam), cand.k,
                                       uses_a ? cand.a : 0.0);
      const auto it = seen.find(key);
      if (it != seen.end()) return it->second;
      transforms.push_back(transform_for(fam, cand, part));
      seen.emplace(key, transforms.size() - 1);
      return transforms.size() - 1;
    };
    std::size_t cell = 0;
    for (const int k : cfg.k_grid) {
      for (const double a : cfg.a_grid) {
        const Candidate cand{k, a, cfg.epsilon};
        cell_transform_idx[cell++] = {intern(ppp_a, cand), intern(ppp_b, cand)};
      }
    }
  }

  std::vector<std::vector<double>> d_f(n_cells, std::vector<double>(cfg.reps, 0.0));
  std::vector<std::vector<double>> d_b(n_cells, std::vector<double>(cfg.reps, 0.0));

  parallel_for(cfg.reps, [&](std::int64_t r) {
    CounterRng rng(cfg.seed, derive_stream({stream_tag::kStudy,
                                            static_cast<std::uint64_t>(r)}));
    DataMatrix g(cfg.n, truth_spec.p);
    for (Eigen::Index i = 0; i < cfg.n; ++i) {
      for (Eigen::Index j = 0; j < truth_spec.p; ++j) g(i, j) = rng.normal();
    }
    const DataMatrix z = g * l.transpose();

    if (cfg.frequentist) {
      const CovMatrix s = sample_covariance(z);
      // Cache per-k fits for the families that ignore a.
      std::map<std::pair<int, int>, double> loss_cache;  // (family, k) -> loss
      auto loss_of = [&](MethodFamily fam, const Candidate& cand) {
        const bool uses_a = fam == MethodFamily::kBlockwise;
        if (!uses_a) {
          const auto key = std::make_pair(static_cast<int>(fam), cand.k);
          const auto it = loss_cache.find(key);
          if (it != loss_cache.end()) return it->second;
          const double v = loss(detail::fit_point(fam, cand, s, part), truth);
          loss_cache.emplace(key, v);
          return v;
        }
        return loss(detail::fit_point(fam, cand, s, part), truth);
      };
      std::size_t cell = 0;
      for (const int k : cfg.k_grid) {
        for (const double a : cfg.a_grid) {
          const Candidate cand{k, a, cfg.epsilon};
          d_f[cell][r] = loss_of(cfg.method_a, cand) - loss_of(cfg.method_b, cand);
          ++cell;
        }
      }
    }

    if (cfg.bayes) {
      const IWParams post =
          iw_posterior(IWParams::default_prior(truth_spec.p), z);
      const auto means =
          ppp_means(post, transforms, cfg.ppp_draws,
                    derive_stream({cfg.seed, stream_tag::kPosterior,
                                   static_cast<std::uint64_t>(r)}));
      std::vector<double> tr_loss(transforms.size());
      for (std::size_t t = 0; t < transforms.size(); ++t) {
        tr_loss[t] = loss(means[t], truth);
      }
      for (std::size_t cell = 0; cell < n_cells; ++cell) {
        d_b[cell][r] = tr_loss[cell_transform_idx[cell].first] -
                       tr_loss[cell_transform_idx[cell].second];
      }
    }
  });

  CompareReport report;
  report.seed = cfg.seed;
  std::size_t cell = 0;
  for (const int k : cfg.k_grid) {
    for (const double a : cfg.a_grid) {
      CompareCell out;
      out.k = k;
      out.a = a;
      if (cfg.frequentist) {
        out.d_f = d_f[cell];
        out.t_f = t_value(out.d_f);
        for (const double v : out.d_f) out.mean_d_f += v;
        out.mean_d_f /= static_cast<double>(cfg.reps);
      }
      if (cfg.bayes) {
        out.d_b = d_b[cell];
        out.t_b = t_value(out.d_b);
        for (const double v : out.d_b) out.mean_d_b += v;
        out.mean_d_b /= static_cast<double>(cfg.reps);
      }
      report.cells.push_back(std::move(out));
      ++cell;
    }
  }
  report.wall_seconds = seconds_since(t0);
  return report;
}

RateReport rate_study(const RateConfig& cfg) {
  const auto t0 = Clock::now();
  if (cfg.n_list.size() < 3) throw InputError("rate_study: need >= 3 sizes");
  for (std::size_t i = 1; i < cfg.n_list.size(); ++i) {
    if (cfg.n_list[i] <= cfg.n_list[i - 1]) {
      throw InputError("rate_study: n_list must be strictly increasing");
    }
  }
  if (cfg.reps < 2) throw InputError("rate_study: insufficient replications");
  if (!(cfg.alpha > 0.0)) throw InputError("rate_study: alpha must be > 0");

  RateReport report;
  report.seed = cfg.seed;
  report.alpha = cfg.alpha;

  std::vector<double> ns_d, risks;
  for (std::size_t idx = 0; idx < cfg.n_list.size(); ++idx) {
    const Eigen::Index n = cfg.n_list[idx];
    const double kf = std::pow(static_cast<double>(n),
                               1.0 / (2.0 * cfg.alpha + 1.0));
    const int k = static_cast<int>(std::ceil(kf - 1e-9));
    const Eigen::Index p = 2 * n;
    const Eigen::Index p0 =
        static_cast<Eigen::Index>(std::floor(0.8 * static_cast<double>(p)));
    const Partition part(p, p0);
    const double eps = cfg.fixed_epsilon >= 0.0
                           ? cfg.fixed_epsilon
                           : std::min(0.5, std::sqrt(static_cast<double>(k) /
                                                     static_cast<double>(n)));
    const CovMatrix sigma0 = make_sigma0({p, cfg.rho, cfg.alpha, 0.5});
    const CoefMatrix truth = cond_mean_operator(sigma0, part);
    const BlockwiseParams params(k, cfg.a, eps);

    const auto losses = detail::mc_losses(
        sigma0, n, truth, part, cfg.reps, cfg.seed,
        derive_stream({static_cast<std::uint64_t>(idx)}),
        [&](const DataMatrix& z, std::uint64_t) {
          return blockwise_estimator(sample_covariance(z), params, part);
        });

    double mean_sq = 0.0;
    for (const double v : losses) mean_sq += v * v;
    mean_sq /= static_cast<double>(losses.size());

    RatePoint pt;
    pt.n = n;
    pt.p = p;
    pt.p0 = p0;
    pt.k = k;
    pt.epsilon = eps;
    pt.mean_sq_loss = mean_sq;
    report.points.push_back(pt);
    ns_d.push_back(static_cast<double>(n));
    risks.push_back(mean_sq);
  }
  report.slope = log_log_slope(ns_d, risks);
  report.wall_seconds = seconds_since(t0);
  return report;
}

double precision_decay(const CovMatrix& sigma0, int k, double a) {
  if (k < 1) throw InputError("precision_decay: k must be >= 1");
  if (!(a > 0.0)) throw InputError("precision_decay: a must be > 0");
  const Eigen::Index p = sigma0.dim();
  const double threshold = a * static_cast<double>(k) *
                           std::log(static_cast<double>(k));
  if (threshold >= static_cast<double>(p)) {
    warn("precision_decay: offset a*k*log(k) = " + std::to_string(threshold) +
         " is not below the dimension " + std::to_string(p) + "; returning 0");
    return 0.0;
  }
  const CovMatrix w = spd_inverse(sigma0);
  double best = 0.0;
  for (Eigen::Index j = 0; j < p; ++j) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < p; ++i) {
      if (static_cast<double>(std::abs(i - j)) > threshold) {
        s += std::abs(w(i, j));
      }
    }
    best = std::max(best, s);
  }
  return best;
}

}  // namespace bandtaper
