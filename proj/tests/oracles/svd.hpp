#pragma once

#include <Eigen/SVD>

#include "cfisac/types.hpp"

namespace oracle {

// sigma_min / sigma_max straight from a two-sided Jacobi SVD of H.
inline double inverse_condition(const cfisac::CMat& H) {
  Eigen::JacobiSVD<cfisac::CMat> svd(H);
  const auto& s = svd.singularValues();
  return s(s.size() - 1) / s(0);
}

inline double sigma_max(const cfisac::CMat& H) {
  return Eigen::JacobiSVD<cfisac::CMat>(H).singularValues()(0);
}

}  // namespace oracle
