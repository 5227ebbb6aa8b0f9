#pragma once

#include <span>

#include <Eigen/Core>

#include "tsm/surv_data.hpp"

namespace tsm {

struct LogisticOptions {
  int max_iter = 50;
  double tol = 1e-9;
  // |coefficient| beyond this is treated as a diverging (separated) fit
  double divergence_bound = 15.0;
};

// Pooled logistic regression on a person-period table. `x` holds the design
// matrix including any intercept column. Throws FitError("separation") when
// the likelihood has no finite maximiser.
FitResult pooled_logistic_fit(std::span<const int> outcome, const Eigen::MatrixXd& x,
                              const LogisticOptions& opts = {});

double logistic_loglik(std::span<const int> outcome, const Eigen::MatrixXd& x,
                       const Eigen::VectorXd& beta);

inline double inv_logit(double eta) { return 1.0 / (1.0 + std::exp(-eta)); }

}  // namespace tsm
