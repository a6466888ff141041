#include "bandtaper/operators.hpp"

#include <cmath>

namespace bandtaper {

Eigen::Index BlockwiseParams::block_size_clamped(Eigen::Index p0) const {
  const Eigen::Index b = block_size();
  if (b > p0) {
    warn("blockwise block size 2*floor(a*k*log k) = " + std::to_string(b) +
         " exceeds p0 = " + std::to_string(p0) + "; clamping to p0");
    return p0;
  }
  return b;
}

double taper_weight(Eigen::Index i, Eigen::Index j, int k) {
  const double dist = static_cast<double>(i >= j ? i - j : j - i);
  const double half = 0.5 * k;
  if (dist <= half) return 1.0;
  if (dist < k) return (2.0 * (k - dist)) / k;  // == 2 - dist/(k/2)
  return 0.0;
}

CovMatrix taper(const CovMatrix& s, int k) {
  if (k < 1) throw InputError("taper: k must be >= 1");
  const Eigen::Index p = s.dim();
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index i = j; i < std::min(p, j + k); ++i) {
      const double v = taper_weight(i + 1, j + 1, k) * s(i, j);
      t(i, j) = v;
      t(j, i) = v;
    }
  }
  return CovMatrix::from_symmetric(std::move(t));
}

CovMatrix band(const CovMatrix& s, int k) {
  if (k < 0) throw InputError("band: k must be >= 0");
  const Eigen::Index p = s.dim();
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index i = j; i <= std::min(p - 1, j + k); ++i) {
      t(i, j) = s(i, j);
      t(j, i) = s(i, j);
    }
  }
  return CovMatrix::from_symmetric(std::move(t));
}

CovMatrix pd_adjust(const CovMatrix& a, double epsilon) {
  if (!(epsilon >= 0.0)) throw InputError("pd_adjust: epsilon must be >= 0");
  const double lmin = sym_eigen_min(a);
  const double shift = epsilon - lmin;
  if (shift <= 0.0) return a;
  Eigen::MatrixXd t = a.mat();
  t.diagonal().array() += shift;
  return CovMatrix::from_symmetric(std::move(t));
}

namespace {
// Clipped 1-based range [l v 1, (l+k-1) ^ q] mapped to 0-based [lo, hi].
std::pair<Eigen::Index, Eigen::Index> clip_range(Eigen::Index q, Eigen::Index l,
                                                 Eigen::Index k) {
  const Eigen::Index lo = std::max<Eigen::Index>(l, 1) - 1;
  const Eigen::Index hi = std::min(l + k - 1, q) - 1;
  return {lo, hi};
}
}  // namespace

CovMatrix sub_block(const CovMatrix& s, Eigen::Index l, Eigen::Index k) {
  if (k < 1) throw InputError("sub_block: k must be >= 1");
  const auto [lo, hi] = clip_range(s.dim(), l, k);
  if (hi < lo) {
    throw InputError("sub_block: empty clipped range for l=" + std::to_string(l) +
                     ", k=" + std::to_string(k) + ", dim=" + std::to_string(s.dim()));
  }
  return CovMatrix::from_symmetric(s.mat().block(lo, lo, hi - lo + 1, hi - lo + 1));
}

CovMatrix sub_block_embedded(const CovMatrix& s, Eigen::Index l, Eigen::Index k) {
  if (k < 1) throw InputError("sub_block_embedded: k must be >= 1");
  const Eigen::Index q = s.dim();
  const auto [lo, hi] = clip_range(q, l, k);
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(q, q);
  if (hi >= lo) {
    t.block(lo, lo, hi - lo + 1, hi - lo + 1) =
        s.mat().block(lo, lo, hi - lo + 1, hi - lo + 1);
  }
  return CovMatrix::from_symmetric(std::move(t));
}

CovMatrix lambda_op(const CovMatrix& a, Eigen::Index b, double epsilon) {
  const Eigen::Index p0 = a.dim();
  if (b < 1 || b > p0) {
    throw InputError("lambda_op: need 1 <= b <= p0, got b=" + std::to_string(b) +
                     ", p0=" + std::to_string(p0));
  }
  if (!(epsilon >= 0.0)) throw InputError("lambda_op: epsilon must be >= 0");
  const CovMatrix block =
      CovMatrix::from_symmetric(a.mat().block(p0 - b, p0 - b, b, b));
  const CovMatrix inv = spd_inverse(pd_adjust(block, epsilon));
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(p0, p0);
  out.block(p0 - b, p0 - b, b, b) = inv.mat();
  return CovMatrix::from_symmetric(std::move(out));
}

}  // namespace bandtaper
