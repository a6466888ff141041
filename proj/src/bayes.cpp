#include "bandtaper/bayes.hpp"

#include "bandtaper/parallel.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace bandtaper {

namespace {

/// Bartlett factor: lower triangular, column j holding sqrt(chi^2(df - j)) on
/// the diagonal (0-based j) followed by standard normals, consumed per column
/// top to bottom. The fill order is part of the determinism contract.
Eigen::MatrixXd bartlett_lower(Eigen::Index p, double df, CounterRng& rng) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    a(j, j) = std::sqrt(rng.chi_square(df - static_cast<double>(j)));
    for (Eigen::Index i = j + 1; i < p; ++i) a(i, j) = rng.normal();
  }
  return a;
}

/// G := L * A for lower-triangular L and A (result lower triangular).
Eigen::MatrixXd tri_tri_product(const Eigen::MatrixXd& l,
                                const Eigen::MatrixXd& a) {
  const Eigen::Index p = l.rows();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const Eigen::Index s = p - j;
    g.col(j).tail(s).noalias() =
        l.bottomRightCorner(s, s).template triangularView<Eigen::Lower>() *
        a.col(j).tail(s);
  }
  return g;
}

/// T := G^{-1} for lower-triangular G (column-oriented substitution).
Eigen::MatrixXd invert_lower(const Eigen::MatrixXd& g) {
  const Eigen::Index p = g.rows();
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    t(j, j) = 1.0;
    for (Eigen::Index m = j; m < p; ++m) {
      const double xm = t(m, j) / g(m, m);
      t(m, j) = xm;
      const Eigen::Index s = p - 1 - m;
      if (s > 0 && xm != 0.0) {
        t.col(j).tail(s).noalias() -= g.col(m).tail(s) * xm;
      }
    }
  }
  return t;
}

}  // namespace

IWParams::IWParams(CovMatrix scale_, double df_)
    : scale(std::move(scale_)), df(df_) {
  Eigen::LLT<Eigen::MatrixXd> llt(scale.mat());
  if (llt.info() != Eigen::Success) {
    throw InputError("IWParams: scale matrix must be positive definite");
  }
  if (!(df > 2.0 * static_cast<double>(scale.dim()))) {
    throw InputError("IWParams: df must exceed 2*dim, got df=" +
                     std::to_string(df) + ", dim=" + std::to_string(scale.dim()));
  }
}

IWParams IWParams::default_prior(Eigen::Index p) {
  return IWParams(CovMatrix::identity(p), 2.0 * static_cast<double>(p) + 3.0);
}

IWParams iw_posterior(const IWParams& prior, const DataMatrix& z) {
  const Eigen::Index p = prior.dim();
  if (z.rows() > 0 && z.cols() != p) {
    throw InputError("iw_posterior: data has " + std::to_string(z.cols()) +
                     " columns, prior dimension is " + std::to_string(p));
  }
  const Eigen::Index n = z.rows();
  if (n == 0) return prior;
  Eigen::MatrixXd scale = prior.scale.mat();
  scale.selfadjointView<Eigen::Lower>().rankUpdate(z.transpose(), 1.0);
  scale.triangularView<Eigen::StrictlyUpper>() = scale.transpose();
  return IWParams(CovMatrix::from_symmetric(std::move(scale)),
                  prior.df + static_cast<double>(n));
}

CovMatrix wishart_sample(const CovMatrix& scale, double df, CounterRng& rng) {
  const Eigen::Index p = scale.dim();
  if (!(df > static_cast<double>(p - 1))) {
    throw InputError("wishart_sample: df must exceed dim - 1");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(scale.mat());
  if (llt.info() != Eigen::Success) {
    throw SingularityError("wishart_sample: scale is not positive definite");
  }
  const Eigen::MatrixXd ls = llt.matrixL();
  const Eigen::MatrixXd g = tri_tri_product(ls, bartlett_lower(p, df, rng));
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(p, p);
  w.selfadjointView<Eigen::Lower>().rankUpdate(g, 1.0);
  w.triangularView<Eigen::StrictlyUpper>() = w.transpose();
  return CovMatrix::from_symmetric(std::move(w));
}

IwSampler::IwSampler(const IWParams& params) {
  const Eigen::Index p = params.dim();
  wdf_ = params.df - static_cast<double>(p) - 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt(params.scale.mat());
  if (llt.info() != Eigen::Success) {
    throw SingularityError("IwSampler: scale is not positive definite");
  }
  Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(p, p));
  inv = 0.5 * (inv + inv.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt_inv(inv);
  if (llt_inv.info() != Eigen::Success) {
    throw NumericalError("IwSampler: inverse scale lost positive definiteness");
  }
  lb_ = llt_inv.matrixL();
}

Eigen::MatrixXd IwSampler::inverse_chol_factor(CounterRng& rng) const {
  const Eigen::Index p = lb_.rows();
  // Sigma = (Lb A A^T Lb^T)^{-1} = T^T T with T = (Lb A)^{-1}.
  return invert_lower(tri_tri_product(lb_, bartlett_lower(p, wdf_, rng)));
}

CovMatrix IwSampler::sample(CounterRng& rng) const {
  const Eigen::Index p = lb_.rows();
  const Eigen::MatrixXd t = inverse_chol_factor(rng);
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(p, p);
  sigma.selfadjointView<Eigen::Lower>().rankUpdate(t.transpose(), 1.0);
  sigma.triangularView<Eigen::StrictlyUpper>() = sigma.transpose();
  return CovMatrix::from_symmetric(std::move(sigma));
}

banded::BandSym IwSampler::sample_band(CounterRng& rng, Eigen::Index w) const {
  const Eigen::Index p = lb_.rows();
  const Eigen::MatrixXd t = inverse_chol_factor(rng);
  banded::BandSym b(p, std::min(w, p - 1));
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index m = 0; m <= std::min(b.w, p - 1 - j); ++m) {
      const Eigen::Index h = j + m;
      b.d(m, j) = t.col(j).tail(p - h).dot(t.col(h).tail(p - h));
    }
  }
  return b;
}

CovMatrix iw_sample(const IWParams& params, CounterRng& rng) {
  return IwSampler(params).sample(rng);
}

PosteriorDraws ppp(const IWParams& params, const PostFn& post_fn, int n_draws,
                   std::uint64_t seed) {
  if (n_draws < 1) throw InputError("ppp: n_draws must be >= 1");
  const IwSampler sampler(params);
  PosteriorDraws out;
  out.seed = seed;
  out.draws.resize(n_draws);
  parallel_for(n_draws, [&](std::int64_t i) {
    CounterRng rng(seed, derive_stream({stream_tag::kPosterior,
                                        static_cast<std::uint64_t>(i)}));
    const CovMatrix sigma = sampler.sample(rng);
    try {
      out.draws[i] = post_fn(sigma);
    } catch (const std::exception& e) {
      throw NumericalError("ppp: post-processing failed at draw " +
                           std::to_string(i) + ": " + e.what());
    }
  });
  return out;
}

CoefMatrix posterior_mean(const PosteriorDraws& d) {
  if (d.draws.empty()) throw InputError("posterior_mean: no draws");
  CoefMatrix acc = CoefMatrix::Zero(d.draws[0].rows(), d.draws[0].cols());
  for (const auto& m : d.draws) acc += m;
  return acc / static_cast<double>(d.draws.size());
}

double p_loss(const PosteriorDraws& d, const CoefMatrix& c_true) {
  if (d.draws.empty()) throw InputError("p_loss: no draws");
  double acc = 0.0;
  for (const auto& m : d.draws) {
    const double l = loss(m, c_true);
    acc += l * l;
  }
  return acc / static_cast<double>(d.draws.size());
}

PppTransform PppTransform::tapering(int k, double epsilon, const Partition& part) {
  TaperParams check(k, epsilon);
  return PppTransform{Family::kTapering, k, 0.0, epsilon, part};
}

PppTransform PppTransform::blockwise(int k, double a, double epsilon,
                                     const Partition& part) {
  BlockwiseParams check(k, a, epsilon);
  return PppTransform{Family::kBlockwise, k, a, epsilon, part};
}

PppTransform PppTransform::banding(int k, double epsilon, const Partition& part) {
  if (k < 0) throw InputError("PppTransform::banding: k must be >= 0");
  if (!(epsilon >= 0.0)) {
    throw InputError("PppTransform::banding: epsilon must be >= 0");
  }
  return PppTransform{Family::kBanding, k, 0.0, epsilon, part};
}

Eigen::Index PppTransform::band_requirement() const {
  return family == Family::kBanding ? k : k - 1;
}

CoefMatrix PppTransform::apply(const CovMatrix& sigma) const {
  switch (family) {
    case Family::kTapering:
      return tapering_estimator(sigma, TaperParams(k, epsilon), part);
    case Family::kBlockwise:
      return blockwise_estimator(sigma, BlockwiseParams(k, a, epsilon), part);
    case Family::kBanding:
      return banding_estimator(sigma, k, epsilon, part);
  }
  throw InputError("PppTransform: unknown family");
}

CoefMatrix PppTransform::apply_band(const banded::BandSym& sigma_band) const {
  switch (family) {
    case Family::kTapering: {
      banded::BandSym tk = detail::taper_band_from_band(sigma_band, k);
      detail::pd_adjust_band(tk, epsilon);
      return detail::cond_mean_banded(tk, part);
    }
    case Family::kBlockwise: {
      const banded::BandSym tk = detail::taper_band_from_band(sigma_band, k);
      const Eigen::Index b =
          BlockwiseParams(k, a, epsilon).block_size_clamped(part.p0);
      return detail::blockwise_from_taper_band(tk, b, epsilon, part);
    }
    case Family::kBanding: {
      banded::BandSym bb = detail::band_band_from_band(sigma_band, k);
      detail::pd_adjust_band(bb, epsilon);
      return detail::cond_mean_banded(bb, part);
    }
  }
  throw InputError("PppTransform: unknown family");
}

std::vector<CoefMatrix> ppp_means(const IWParams& params,
                                  const std::vector<PppTransform>& transforms,
                                  int n_draws, std::uint64_t seed) {
  if (n_draws < 1) throw InputError("ppp_means: n_draws must be >= 1");
  if (transforms.empty()) throw InputError("ppp_means: no transforms");
  const Eigen::Index p = params.dim();
  Eigen::Index band_req = 0;
  for (const auto& t : transforms) {
    if (t.part.p != p) throw InputError("ppp_means: transform partition != dim");
    band_req = std::max(band_req, t.band_requirement());
  }
  const bool use_band = detail::banded_worthwhile(p, band_req);
  const IwSampler sampler(params);

  const int chunk = 32;  // fixed granularity keeps sums thread-count independent
  const std::int64_t n_chunks = (n_draws + chunk - 1) / chunk;
  const std::size_t nt = transforms.size();
  std::vector<std::vector<CoefMatrix>> partial(
      n_chunks, std::vector<CoefMatrix>(nt));

  parallel_for(n_chunks, [&](std::int64_t c) {
    auto& acc = partial[c];
    for (std::size_t t = 0; t < nt; ++t) {
      acc[t] = CoefMatrix::Zero(transforms[t].part.q(), transforms[t].part.p0);
    }
    const int lo = static_cast<int>(c) * chunk;
    const int hi = std::min(n_draws, lo + chunk);
    for (int i = lo; i < hi; ++i) {
      CounterRng rng(seed, derive_stream({stream_tag::kPosterior,
                                          static_cast<std::uint64_t>(i)}));
      try {
        if (use_band) {
          const banded::BandSym raw = sampler.sample_band(rng, band_req);
          for (std::size_t t = 0; t < nt; ++t) {
            acc[t] += transforms[t].apply_band(raw);
          }
        } else {
          const CovMatrix sigma = sampler.sample(rng);
          for (std::size_t t = 0; t < nt; ++t) {
            acc[t] += transforms[t].apply(sigma);
          }
        }
      } catch (const std::exception& e) {
        throw NumericalError("ppp_means: post-processing failed at draw " +
                             std::to_string(i) + ": " + e.what());
      }
    }
  });

  std::vector<CoefMatrix> means(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    means[t] = CoefMatrix::Zero(transforms[t].part.q(), transforms[t].part.p0);
  }
  for (std::int64_t c = 0; c < n_chunks; ++c) {
    for (std::size_t t = 0; t < nt; ++t) means[t] += partial[c][t];
  }
  for (std::size_t t = 0; t < nt; ++t) means[t] /= static_cast<double>(n_draws);
  return means;
}

}  // namespace bandtaper
