#include "bandtaper/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace bandtaper {

namespace banded {

BandSym BandSym::leading_block(Eigen::Index k) const {
  BandSym b(k, std::min(w, k - 1));
  for (Eigen::Index j = 0; j < k; ++j) {
    const Eigen::Index mmax = std::min(b.w, k - 1 - j);
    b.d.col(j).head(mmax + 1) = d.col(j).head(mmax + 1);
  }
  return b;
}

BandSym BandSym::trailing_block(Eigen::Index k) const {
  const Eigen::Index off = p - k;
  BandSym b(k, std::min(w, k - 1));
  for (Eigen::Index j = 0; j < k; ++j) {
    const Eigen::Index mmax = std::min(b.w, k - 1 - j);
    b.d.col(j).head(mmax + 1) = d.col(off + j).head(mmax + 1);
  }
  return b;
}

Eigen::MatrixXd BandSym::to_dense() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index m = 0; m <= std::min(w, p - 1 - j); ++m) {
      a(j + m, j) = d(m, j);
      a(j, j + m) = d(m, j);
    }
  }
  return a;
}

Eigen::Index detect_half_bandwidth(const Eigen::MatrixXd& a) {
  const Eigen::Index p = a.rows();
  for (Eigen::Index m = p - 1; m >= 1; --m) {
    for (Eigen::Index j = 0; j + m < p; ++j) {
      if (a(j + m, j) != 0.0 || a(j, j + m) != 0.0) return m;
    }
  }
  return 0;
}

BandSym from_dense(const Eigen::MatrixXd& a, Eigen::Index w) {
  const Eigen::Index p = a.rows();
  BandSym b(p, w);
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index m = 0; m <= std::min(w, p - 1 - j); ++m) {
      b.d(m, j) = a(j + m, j);
    }
  }
  return b;
}

int count_below(const BandSym& a, double sigma) {
  const Eigen::Index p = a.p, w = a.w;
  // Factor (A - sigma I) = L D L^T in band layout; f(0, j) holds d_j and
  // f(m, j) holds L(j+m, j). Tiny pivots are replaced by -tiny so that an
  // exactly singular leading minor is counted on the negative side.
  static thread_local Eigen::MatrixXd f;
  f.resize(w + 1, p);
  int neg = 0;
  double scale = 0.0;
  for (Eigen::Index j = 0; j < p; ++j) scale = std::max(scale, std::abs(a.d(0, j)));
  const double tiny = std::max(scale, 1.0) * 1e-300;

  for (Eigen::Index j = 0; j < p; ++j) {
    const Eigen::Index mmax = std::min(w, p - 1 - j);
    for (Eigen::Index m = 0; m <= mmax; ++m) f(m, j) = a.d(m, j);
    f(0, j) -= sigma;
    const Eigen::Index kfirst = std::max<Eigen::Index>(0, j - w);
    for (Eigen::Index k = kfirst; k < j; ++k) {
      const double ljk = f(j - k, k);
      if (ljk == 0.0) continue;
      const double vk = ljk * f(0, k);
      const Eigen::Index mtop = std::min(w - (j - k), mmax);
      for (Eigen::Index m = 0; m <= mtop; ++m) {
        f(m, j) -= f(j - k + m, k) * vk;
      }
    }
    double dj = f(0, j);
    if (std::abs(dj) < tiny) dj = -tiny;
    f(0, j) = dj;
    if (dj < 0.0) ++neg;
    const double inv = 1.0 / dj;
    for (Eigen::Index m = 1; m <= mmax; ++m) f(m, j) *= inv;
  }
  return neg;
}

double eigen_min(const BandSym& a) {
  const Eigen::Index p = a.p, w = a.w;
  if (w == 0) return a.d.row(0).head(p).minCoeff();

  // Gershgorin bounds on the band.
  double lo = a.d(0, 0), hi = a.d(0, 0);
  for (Eigen::Index j = 0; j < p; ++j) {
    double r = 0.0;
    for (Eigen::Index m = 1; m <= std::min(w, p - 1 - j); ++m) r += std::abs(a.d(m, j));
    for (Eigen::Index m = 1; m <= std::min(w, j); ++m) r += std::abs(a.d(m, j - m));
    lo = std::min(lo, a.d(0, j) - r);
    hi = std::max(hi, a.d(0, j) + r);
  }
  const double span = std::max(hi - lo, 1.0);
  lo -= 1e-12 * span;
  hi += 1e-12 * span;
  const double tol = 1e-13 * std::max({1.0, std::abs(lo), std::abs(hi)});

  for (int it = 0; it < 200 && (hi - lo) > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (count_below(a, mid) >= 1) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

BandLLT::BandLLT(const BandSym& a) : p_(a.p), w_(a.w), f_(a.d) {
  for (Eigen::Index j = 0; j < p_; ++j) {
    const Eigen::Index mmax = std::min(w_, p_ - 1 - j);
    const Eigen::Index kfirst = std::max<Eigen::Index>(0, j - w_);
    for (Eigen::Index k = kfirst; k < j; ++k) {
      const double ljk = f_(j - k, k);
      if (ljk == 0.0) continue;
      const Eigen::Index mtop = std::min(w_ - (j - k), mmax);
      for (Eigen::Index m = 0; m <= mtop; ++m) {
        f_(m, j) -= f_(j - k + m, k) * ljk;
      }
    }
    const double dj = f_(0, j);
    if (!(dj > 0.0)) {
      throw SingularityError(
          "banded Cholesky pivot " + std::to_string(dj) + " at column " +
          std::to_string(j) + ": matrix is not positive definite");
    }
    const double root = std::sqrt(dj);
    f_(0, j) = root;
    const double inv = 1.0 / root;
    for (Eigen::Index m = 1; m <= mmax; ++m) f_(m, j) *= inv;
  }
}

void BandLLT::solve_in_place(Eigen::VectorXd& b) const {
  // L y = b
  for (Eigen::Index j = 0; j < p_; ++j) {
    const double yj = b(j) / f_(0, j);
    b(j) = yj;
    const Eigen::Index mmax = std::min(w_, p_ - 1 - j);
    for (Eigen::Index m = 1; m <= mmax; ++m) b(j + m) -= f_(m, j) * yj;
  }
  // L^T x = y
  for (Eigen::Index j = p_ - 1; j >= 0; --j) {
    double s = b(j);
    const Eigen::Index mmax = std::min(w_, p_ - 1 - j);
    for (Eigen::Index m = 1; m <= mmax; ++m) s -= f_(m, j) * b(j + m);
    b(j) = s / f_(0, j);
  }
}

double BandLLT::log_det() const {
  double s = 0.0;
  for (Eigen::Index j = 0; j < p_; ++j) s += std::log(f_(0, j));
  return 2.0 * s;
}

}  // namespace banded

namespace {

// Banded bisection beats the dense solver roughly when w < p/5; stay well
// inside that and keep tiny problems on the exact dense path.
bool use_banded_path(Eigen::Index p, Eigen::Index w) {
  return p >= 24 && w <= p / 5;
}

double dense_eigen_min(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericalError("symmetric eigensolver failed to converge");
  }
  return es.eigenvalues().minCoeff();
}

}  // namespace

double sym_eigen_min(const CovMatrix& a) {
  if (!a.mat().allFinite()) {
    throw InputError("sym_eigen_min: non-finite entries");
  }
  const Eigen::Index p = a.dim();
  if (p == 1) return a(0, 0);
  const Eigen::Index w = banded::detect_half_bandwidth(a.mat());
  if (use_banded_path(p, w)) {
    return banded::eigen_min(banded::from_dense(a.mat(), w));
  }
  return dense_eigen_min(a.mat());
}

double spectral_norm(const RectMatrix& a) {
  if (!a.allFinite()) {
    throw InputError("spectral_norm: non-finite entries");
  }
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  Eigen::MatrixXd gram;
  if (a.rows() <= a.cols()) {
    gram.noalias() = a * a.transpose();
  } else {
    gram.noalias() = a.transpose() * a;
  }
  gram = 0.5 * (gram + gram.transpose());
  if (gram.rows() == 1) return std::sqrt(std::max(gram(0, 0), 0.0));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericalError("spectral_norm: eigensolver failed to converge");
  }
  return std::sqrt(std::max(es.eigenvalues().maxCoeff(), 0.0));
}

CovMatrix spd_inverse(const CovMatrix& a) {
  const double lmin = sym_eigen_min(a);
  if (!(lmin > 1e-12)) {
    throw SingularityError(
        "spd_inverse requires a positive definite input; minimum eigenvalue "
        "found: " + std::to_string(lmin));
  }
  Eigen::LLT<Eigen::MatrixXd> llt(a.mat());
  if (llt.info() != Eigen::Success) {
    throw SingularityError(
        "spd_inverse: Cholesky failed despite minimum eigenvalue " +
        std::to_string(lmin));
  }
  Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(a.dim(), a.dim()));
  inv = 0.5 * (inv + inv.transpose());
  return CovMatrix::from_symmetric(std::move(inv));
}

}  // namespace bandtaper
