#include "bandtaper/estimators.hpp"

#include <cmath>

namespace bandtaper {

namespace detail {

bool banded_worthwhile(Eigen::Index p, Eigen::Index w) {
  return p >= 24 && w <= p / 5;
}

banded::BandSym taper_band_from_dense(const Eigen::MatrixXd& s, int k) {
  const Eigen::Index p = s.rows();
  const Eigen::Index w = std::min<Eigen::Index>(k - 1, p - 1);
  banded::BandSym b(p, w);
  for (Eigen::Index m = 0; m <= w; ++m) {
    const double wt = taper_weight(1 + m, 1, k);
    for (Eigen::Index j = 0; j + m < p; ++j) b.d(m, j) = wt * s(j + m, j);
  }
  return b;
}

banded::BandSym band_band_from_dense(const Eigen::MatrixXd& s, int k) {
  const Eigen::Index p = s.rows();
  const Eigen::Index w = std::min<Eigen::Index>(k, p - 1);
  banded::BandSym b(p, w);
  for (Eigen::Index m = 0; m <= w; ++m) {
    for (Eigen::Index j = 0; j + m < p; ++j) b.d(m, j) = s(j + m, j);
  }
  return b;
}

banded::BandSym taper_band_from_band(const banded::BandSym& raw, int k) {
  const Eigen::Index p = raw.p;
  const Eigen::Index w = std::min<Eigen::Index>(k - 1, p - 1);
  if (raw.w < w) throw InputError("taper_band_from_band: raw band too narrow");
  banded::BandSym b(p, w);
  for (Eigen::Index m = 0; m <= w; ++m) {
    const double wt = taper_weight(1 + m, 1, k);
    b.d.row(m).head(p - m) = wt * raw.d.row(m).head(p - m);
  }
  return b;
}

banded::BandSym band_band_from_band(const banded::BandSym& raw, int k) {
  const Eigen::Index p = raw.p;
  const Eigen::Index w = std::min<Eigen::Index>(k, p - 1);
  if (raw.w < w) throw InputError("band_band_from_band: raw band too narrow");
  banded::BandSym b(p, w);
  for (Eigen::Index m = 0; m <= w; ++m) {
    b.d.row(m).head(p - m) = raw.d.row(m).head(p - m);
  }
  return b;
}

double pd_adjust_band(banded::BandSym& a, double eps) {
  const double lmin = banded::eigen_min(a);
  const double shift = eps - lmin;
  if (shift <= 0.0) return 0.0;
  a.add_to_diagonal(shift);
  return shift;
}

CoefMatrix cond_mean_banded(const banded::BandSym& a, const Partition& part) {
  const Eigen::Index p0 = part.p0, q = part.q(), w = a.w;
  banded::BandLLT chol(a.leading_block(p0));
  CoefMatrix out = CoefMatrix::Zero(q, p0);
  Eigen::VectorXd v(p0);
  for (Eigen::Index r = 0; r < std::min(w, q); ++r) {
    const Eigen::Index i = p0 + r;
    v.setZero();
    for (Eigen::Index j = std::max<Eigen::Index>(0, i - w); j < p0; ++j) {
      v(j) = a.at(i, j);
    }
    chol.solve_in_place(v);
    out.row(r) = v;
  }
  return out;
}

CovMatrix cond_variance_banded(const banded::BandSym& a, const Partition& part) {
  const Eigen::Index p0 = part.p0, q = part.q(), w = a.w;
  banded::BandLLT chol(a.leading_block(p0));

  Eigen::MatrixXd nu(q, q);
  for (Eigen::Index c = 0; c < q; ++c) {
    for (Eigen::Index r = 0; r < q; ++r) nu(r, c) = a.at(p0 + r, p0 + c);
  }

  const Eigen::Index m = std::min(w, q);
  Eigen::MatrixXd sol(p0, m);
  Eigen::VectorXd v(p0);
  for (Eigen::Index r = 0; r < m; ++r) {
    const Eigen::Index i = p0 + r;
    v.setZero();
    for (Eigen::Index j = std::max<Eigen::Index>(0, i - w); j < p0; ++j) {
      v(j) = a.at(i, j);
    }
    chol.solve_in_place(v);
    sol.col(r) = v;
  }
  for (Eigen::Index r = 0; r < m; ++r) {
    const Eigen::Index i = p0 + r;
    for (Eigen::Index s = 0; s < m; ++s) {
      double acc = 0.0;
      for (Eigen::Index j = std::max<Eigen::Index>(0, i - w); j < p0; ++j) {
        acc += a.at(i, j) * sol(j, s);
      }
      nu(r, s) -= acc;
    }
  }
  return CovMatrix(std::move(nu));
}

CoefMatrix blockwise_from_taper_band(const banded::BandSym& tk, Eigen::Index b,
                                     double eps, const Partition& part) {
  const Eigen::Index p0 = part.p0, q = part.q(), w = tk.w;
  banded::BandSym trail = tk.leading_block(p0).trailing_block(b);
  pd_adjust_band(trail, eps);
  banded::BandLLT chol(trail);

  CoefMatrix out = CoefMatrix::Zero(q, p0);
  Eigen::VectorXd u(b);
  for (Eigen::Index r = 0; r < std::min(w, q); ++r) {
    const Eigen::Index i = p0 + r;
    u.setZero();
    const Eigen::Index jlo = std::max(p0 - b, i - w);
    for (Eigen::Index j = jlo; j < p0; ++j) u(j - (p0 - b)) = tk.at(i, j);
    chol.solve_in_place(u);
    out.row(r).segment(p0 - b, b) = u;
  }
  return out;
}

}  // namespace detail

CovMatrix sample_covariance(const DataMatrix& z, bool center) {
  const Eigen::Index n = z.rows(), p = z.cols();
  if (n < 1) throw InputError("sample_covariance: need at least one row");
  if (p < 1) throw InputError("sample_covariance: need at least one column");
  if (!z.allFinite()) throw InputError("sample_covariance: non-finite entries");
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(p, p);
  if (center) {
    const Eigen::RowVectorXd mean = z.colwise().mean();
    const Eigen::MatrixXd zc = z.rowwise() - mean;
    s.selfadjointView<Eigen::Lower>().rankUpdate(zc.transpose(), 1.0 / n);
  } else {
    s.selfadjointView<Eigen::Lower>().rankUpdate(z.transpose(), 1.0 / n);
  }
  s.triangularView<Eigen::StrictlyUpper>() = s.transpose();
  return CovMatrix::from_symmetric(std::move(s));
}

CoefMatrix cond_mean_operator(const CovMatrix& s, const Partition& part) {
  if (s.dim() != part.p) {
    throw InputError("cond_mean_operator: matrix dim != partition p");
  }
  const Eigen::Index w = banded::detect_half_bandwidth(s.mat());
  if (detail::banded_worthwhile(part.p, w)) {
    return detail::cond_mean_banded(banded::from_dense(s.mat(), w), part);
  }
  const auto xx = s.mat().topLeftCorner(part.p0, part.p0);
  Eigen::LLT<Eigen::MatrixXd> llt(xx);
  if (llt.info() != Eigen::Success) {
    throw SingularityError(
        "cond_mean_operator: S_XX is not positive definite (PD-adjust first)");
  }
  const auto xy = s.mat().topRightCorner(part.p0, part.q());
  return llt.solve(xy).transpose();
}

CovMatrix cond_variance(const CovMatrix& s, const Partition& part) {
  if (s.dim() != part.p) {
    throw InputError("cond_variance: matrix dim != partition p");
  }
  const Eigen::Index w = banded::detect_half_bandwidth(s.mat());
  if (detail::banded_worthwhile(part.p, w)) {
    return detail::cond_variance_banded(banded::from_dense(s.mat(), w), part);
  }
  const auto xx = s.mat().topLeftCorner(part.p0, part.p0);
  Eigen::LLT<Eigen::MatrixXd> llt(xx);
  if (llt.info() != Eigen::Success) {
    throw SingularityError(
        "cond_variance: S_XX is not positive definite (PD-adjust first)");
  }
  const auto xy = s.mat().topRightCorner(part.p0, part.q());
  const auto yy = s.mat().bottomRightCorner(part.q(), part.q());
  Eigen::MatrixXd nu = yy - xy.transpose() * llt.solve(xy);
  return CovMatrix(std::move(nu));
}

CoefMatrix tapering_estimator(const CovMatrix& s, const TaperParams& params,
                              const Partition& part) {
  if (s.dim() != part.p) {
    throw InputError("tapering_estimator: matrix dim != partition p");
  }
  const Eigen::Index weff = std::min<Eigen::Index>(params.k - 1, part.p - 1);
  if (detail::banded_worthwhile(part.p, weff)) {
    banded::BandSym bt = detail::taper_band_from_dense(s.mat(), params.k);
    detail::pd_adjust_band(bt, params.epsilon);
    return detail::cond_mean_banded(bt, part);
  }
  return cond_mean_operator(pd_adjust(taper(s, params.k), params.epsilon), part);
}

CoefMatrix banding_estimator(const CovMatrix& s, int k, double epsilon,
                             const Partition& part) {
  if (s.dim() != part.p) {
    throw InputError("banding_estimator: matrix dim != partition p");
  }
  if (k < 0) throw InputError("banding_estimator: k must be >= 0");
  if (!(epsilon >= 0.0)) throw InputError("banding_estimator: epsilon must be >= 0");
  const Eigen::Index weff = std::min<Eigen::Index>(k, part.p - 1);
  if (detail::banded_worthwhile(part.p, weff)) {
    banded::BandSym bb = detail::band_band_from_dense(s.mat(), k);
    detail::pd_adjust_band(bb, epsilon);
    return detail::cond_mean_banded(bb, part);
  }
  return cond_mean_operator(pd_adjust(band(s, k), epsilon), part);
}

CoefMatrix blockwise_estimator(const CovMatrix& s, const BlockwiseParams& params,
                               const Partition& part) {
  if (s.dim() != part.p) {
    throw InputError("blockwise_estimator: matrix dim != partition p");
  }
  const Eigen::Index b = params.block_size_clamped(part.p0);
  const Eigen::Index weff = std::min<Eigen::Index>(params.k - 1, part.p - 1);
  if (detail::banded_worthwhile(part.p, weff)) {
    const banded::BandSym tk = detail::taper_band_from_dense(s.mat(), params.k);
    return detail::blockwise_from_taper_band(tk, b, params.epsilon, part);
  }
  const CovMatrix t = taper(s, params.k);
  const CovMatrix txx =
      CovMatrix::from_symmetric(t.mat().topLeftCorner(part.p0, part.p0));
  const CovMatrix block = CovMatrix::from_symmetric(
      txx.mat().block(part.p0 - b, part.p0 - b, b, b));
  const CovMatrix inv = spd_inverse(pd_adjust(block, params.epsilon));
  CoefMatrix out = CoefMatrix::Zero(part.q(), part.p0);
  out.rightCols(b).noalias() =
      t.mat().bottomLeftCorner(part.q(), part.p0).rightCols(b) * inv.mat();
  return out;
}

double loss(const CoefMatrix& c_hat, const CoefMatrix& c_true) {
  if (c_hat.rows() != c_true.rows() || c_hat.cols() != c_true.cols()) {
    throw InputError("loss: shape mismatch");
  }
  return spectral_norm(c_hat - c_true);
}

}  // namespace bandtaper
