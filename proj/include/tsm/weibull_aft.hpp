#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "tsm/surv_data.hpp"

namespace tsm {

// log T = mu + gamma' z + sigma W, W standard minimum extreme value.
struct WeibullAftFit {
  double intercept = 0.0;
  double log_scale = 0.0;
  // beta = gamma (log acceleration factors), se alongside.
  FitResult fit;
};

struct WeibullAftOptions {
  int max_iter = 100;
  double tol = 1e-9;
  double min_scale = 1e-3;
  double max_scale = 1e3;
};

// theta = (mu, gamma..., log sigma)
double weibull_aft_loglik(std::span<const double> time, std::span<const int> event,
                          const Eigen::MatrixXd& z, const Eigen::VectorXd& theta);
Eigen::VectorXd weibull_aft_score(std::span<const double> time,
                                  std::span<const int> event,
                                  const Eigen::MatrixXd& z,
                                  const Eigen::VectorXd& theta);

// Maximum likelihood by damped Newton. `z` is n x q (q may be 0).
WeibullAftFit weibull_aft_fit(std::span<const double> time, std::span<const int> event,
                              const Eigen::MatrixXd& z,
                              const WeibullAftOptions& opts = {});

}  // namespace tsm
