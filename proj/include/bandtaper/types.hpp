#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace bandtaper {

/// Rows are observations, columns are variables.
using DataMatrix = Eigen::MatrixXd;

/// General rectangular matrix (coefficient matrices, loss arguments).
using RectMatrix = Eigen::MatrixXd;

/// Regression coefficient / conditional mean operator, shape (p - p0) x p0.
using CoefMatrix = Eigen::MatrixXd;

/// Bad caller input: shape mismatches, invalid parameters, unparsable files.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure while computing (non-convergence, non-PD matrices, ...).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A matrix required to be (numerically) positive definite was not.
class SingularityError : public NumericalError {
 public:
  explicit SingularityError(const std::string& msg) : NumericalError(msg) {}
};

/// Emit a non-fatal warning (stderr, thread-safe).
void warn(const std::string& msg);

/**
 * Symmetric p x p matrix with covariance semantics. Not necessarily positive
 * definite (tapering can make it indefinite). Symmetry is enforced at
 * construction: the input is replaced by (A + A^T)/2, with a warning when the
 * largest asymmetry exceeds 1e-10.
 */
class CovMatrix {
 public:
  explicit CovMatrix(Eigen::MatrixXd entries);

  /// Bypass symmetrization for matrices known symmetric by construction.
  static CovMatrix from_symmetric(Eigen::MatrixXd entries);

  static CovMatrix identity(Eigen::Index p) {
    return from_symmetric(Eigen::MatrixXd::Identity(p, p));
  }
  static CovMatrix zero(Eigen::Index p) {
    return from_symmetric(Eigen::MatrixXd::Zero(p, p));
  }

  Eigen::Index dim() const { return m_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
  const Eigen::MatrixXd& mat() const { return m_; }
  Eigen::MatrixXd& mut() { return m_; }

 private:
  CovMatrix() = default;
  Eigen::MatrixXd m_;
};

/**
 * Split of a p-vector into covariates X (first p0 entries) and responses Y
 * (remaining p - p0). For a p x p matrix A, the blocks are
 *   A_XX = A[1:p0, 1:p0], A_YX = A[(p0+1):p, 1:p0],
 *   A_XY = A[1:p0, (p0+1):p], A_YY = A[(p0+1):p, (p0+1):p]
 * in 1-based notation.
 */
struct Partition {
  Eigen::Index p = 0;
  Eigen::Index p0 = 0;

  Partition(Eigen::Index p_, Eigen::Index p0_) : p(p_), p0(p0_) {
    if (p0 < 1 || p0 >= p) {
      throw InputError("Partition requires 1 <= p0 < p, got p0=" +
                       std::to_string(p0_) + ", p=" + std::to_string(p_));
    }
  }

  Eigen::Index q() const { return p - p0; }
};

}  // namespace bandtaper
