#pragma once

#include <vector>

#include <Eigen/Dense>

#include "npassive/spectra.hpp"

namespace testing {

inline npassive::Spectrumd levels(std::vector<double> e) { return npassive::Spectrumd::normalize(e); }

inline npassive::DiagonalStated state(const std::vector<double>& p) { return npassive::DiagonalStated::make(p); }

inline std::vector<double> vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

inline Eigen::VectorXd eig(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace testing
