#pragma once

#include "bandtaper/types.hpp"

#include <Eigen/Dense>

namespace bandtaper {

/**
 * Minimum eigenvalue of a symmetric matrix, absolute accuracy ~1e-12.
 *
 * Matrices with a small half-bandwidth (relative to their dimension) are
 * handled by Sturm-style bisection on a banded LDL^T inertia count, which is
 * both deterministic and far cheaper than a dense solve; everything else goes
 * through a dense tridiagonal-QR eigensolver.
 */
double sym_eigen_min(const CovMatrix& a);

/// Largest singular value, computed from the symmetric eigenproblem of the
/// smaller of A^T A and A A^T. Relative accuracy ~1e-8 or better.
double spectral_norm(const RectMatrix& a);

/**
 * Inverse of a symmetric positive definite matrix via Cholesky.
 * Requires sym_eigen_min(a) > 1e-12; throws SingularityError naming the
 * minimum eigenvalue found otherwise. The result satisfies
 * ||A A^{-1} - I|| <= 1e-8 * dim for inputs within that contract.
 */
CovMatrix spd_inverse(const CovMatrix& a);

namespace banded {

/**
 * Symmetric band storage (lower layout): for half-bandwidth w,
 * d(m, j) = A(j + m, j) for m = 0..w and j + m < p. Entries beyond the band
 * are implicitly zero.
 */
struct BandSym {
  Eigen::Index p = 0;
  Eigen::Index w = 0;
  Eigen::MatrixXd d;  // (w + 1) x p, unused tail of each column is zero

  BandSym() = default;
  BandSym(Eigen::Index p_, Eigen::Index w_)
      : p(p_), w(w_), d(Eigen::MatrixXd::Zero(w_ + 1, p_)) {}

  double at(Eigen::Index i, Eigen::Index j) const {
    const Eigen::Index lo = std::min(i, j), hi = std::max(i, j);
    return (hi - lo) <= w ? d(hi - lo, lo) : 0.0;
  }

  void add_to_diagonal(double c) { d.row(0).array() += c; }

  /// Leading k x k principal sub-block (band width clipped accordingly).
  BandSym leading_block(Eigen::Index k) const;
  /// Trailing k x k principal sub-block.
  BandSym trailing_block(Eigen::Index k) const;

  Eigen::MatrixXd to_dense() const;
};

/// Largest m >= 0 such that some entry with |i - j| == m is nonzero.
Eigen::Index detect_half_bandwidth(const Eigen::MatrixXd& a);

/// Extract the band |i - j| <= w of a dense symmetric matrix.
BandSym from_dense(const Eigen::MatrixXd& a, Eigen::Index w);

/// Number of eigenvalues strictly below `sigma` (banded LDL^T inertia count
/// with the usual tiny-pivot safeguard).
int count_below(const BandSym& a, double sigma);

/// Minimum eigenvalue by bisection on count_below. Deterministic.
double eigen_min(const BandSym& a);

/// Banded Cholesky factorization A = L L^T; throws SingularityError when a
/// pivot is not strictly positive.
class BandLLT {
 public:
  explicit BandLLT(const BandSym& a);

  /// In-place solve A x = b (forward + back substitution, O(p w) each).
  void solve_in_place(Eigen::VectorXd& b) const;
  Eigen::VectorXd solve(Eigen::VectorXd b) const {
    solve_in_place(b);
    return b;
  }
  double log_det() const;  // log det A = 2 sum log L_jj

 private:
  Eigen::Index p_, w_;
  Eigen::MatrixXd f_;  // Cholesky factor in band layout
};

}  // namespace banded

}  // namespace bandtaper
