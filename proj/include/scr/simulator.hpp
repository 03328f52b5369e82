#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "scr/dataset.hpp"

namespace scr {

// Weibull hazards h0g(t) = alpha_g * kappa_g * t^(alpha_g-1); covariate
// effects act proportionally on each transition hazard.  theta is the
// variance of the shared Gamma frailty (0 disables it, gamma == 1 exactly).
struct WeibullIDTruth {
  Eigen::Vector3d alpha{1, 1, 1};
  Eigen::Vector3d kappa{1, 1, 1};
  Eigen::VectorXd beta1, beta2, beta3;
  double theta = 0;
  Eigen::Matrix3d sigma_v = Eigen::Matrix3d::Zero();  // cluster effect covariance
  double cens_lo = 0, cens_hi = 0;                    // administrative censoring window
};

struct WeibullUniTruth {
  double alpha = 1, kappa = 1;
  Eigen::VectorXd beta;
  double sigma_v2 = 0;  // variance of the normal cluster effect
  double cens_lo = 0, cens_hi = 0;
};

// Generates n subjects of illness-death data.  Covariate matrices in cov may
// be empty (no covariates) or n x p_g; cov.cluster, when non-empty, selects
// multivariate normal cluster effects with covariance truth.sigma_v.
// The draw streams for cluster effects, frailties, event times and censoring
// are separated, and each subject consumes a fixed number of event-time
// draws, so turning one model feature on or off leaves the others' draws
// untouched.
SemiCompDataset simulate_id(std::size_t n, const Covariates& cov, const WeibullIDTruth& truth,
                            std::uint64_t seed);

UniDataset simulate_univariate(std::size_t n, const Eigen::MatrixXd& x,
                               const std::vector<std::string>& names,
                               const std::vector<int>& cluster, const WeibullUniTruth& truth,
                               std::uint64_t seed);

}  // namespace scr
