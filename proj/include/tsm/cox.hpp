#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "tsm/surv_data.hpp"

namespace tsm {

enum class Ties { Efron, Breslow };

struct CoxOptions {
  Ties ties = Ties::Efron;
  int max_iter = 25;
  double tol = 1e-9;  // on |change in log partial likelihood|
  int max_halving = 10;
  std::vector<double> init;  // defaults to zero
};

struct CoxDerivatives {
  double loglik = 0.0;
  Eigen::VectorXd score;
  Eigen::MatrixXd information;
};

// Weighted partial likelihood and its first two derivatives at beta.
CoxDerivatives cox_derivatives(const SurvDataset& data,
                               std::span<const double> beta,
                               Ties ties = Ties::Efron);

// Newton-Raphson maximiser of the weighted partial likelihood.
// Throws FitError on collinear covariates or a diverging (infinite) estimate.
FitResult cox_fit(const SurvDataset& data, const CoxOptions& opts = {});

// Score statistic U(0)' I(0)^{-1} U(0).
double cox_score_test(const SurvDataset& data, Ties ties = Ties::Efron);

}  // namespace tsm
