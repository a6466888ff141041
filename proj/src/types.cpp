#include "bandtaper/types.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace bandtaper {

namespace {
std::mutex g_warn_mutex;
}

void warn(const std::string& msg) {
  std::lock_guard<std::mutex> lock(g_warn_mutex);
  std::cerr << "[bandtaper] warning: " << msg << "\n";
}

CovMatrix::CovMatrix(Eigen::MatrixXd entries) {
  if (entries.rows() != entries.cols() || entries.rows() < 1) {
    throw InputError("CovMatrix must be square with dim >= 1, got " +
                     std::to_string(entries.rows()) + "x" +
                     std::to_string(entries.cols()));
  }
  if (!entries.allFinite()) {
    throw InputError("CovMatrix entries must be finite");
  }
  const double asym = (entries - entries.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10) {
    warn("CovMatrix input asymmetric by " + std::to_string(asym) +
         "; symmetrizing as (A + A^T)/2");
  }
  if (asym > 0.0) {
    m_ = 0.5 * (entries + entries.transpose());
  } else {
    m_ = std::move(entries);
  }
}

CovMatrix CovMatrix::from_symmetric(Eigen::MatrixXd entries) {
  CovMatrix c;
  c.m_ = std::move(entries);
  return c;
}

}  // namespace bandtaper
