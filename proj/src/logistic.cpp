#include "tsm/logistic.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace tsm {

namespace {

// log(1 + exp(eta)) without overflow
double softplus(double eta) {
  return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

}  // namespace

double logistic_loglik(std::span<const int> outcome, const Eigen::MatrixXd& x,
                       const Eigen::VectorXd& beta) {
  Eigen::VectorXd eta = x * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    ll += (outcome[static_cast<std::size_t>(i)] ? eta[i] : 0.0) - softplus(eta[i]);
  }
  return ll;
}

FitResult pooled_logistic_fit(std::span<const int> outcome, const Eigen::MatrixXd& x,
                              const LogisticOptions& opts) {
  const Eigen::Index n = x.rows(), p = x.cols();
  if (static_cast<Eigen::Index>(outcome.size()) != n) {
    throw std::invalid_argument("pooled_logistic_fit: length mismatch");
  }
  if (n == 0 || p == 0) throw std::invalid_argument("empty design");
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int v = outcome[static_cast<std::size_t>(i)];
    if (v != 0 && v != 1) throw std::invalid_argument("outcome must be 0/1");
    y[i] = v;
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  double ll = logistic_loglik(outcome, x, beta);
  Eigen::MatrixXd info(p, p);
  bool converged = false;
  int iter = 0;
  while (iter < opts.max_iter) {
    ++iter;
    Eigen::VectorXd eta = x * beta;
    Eigen::VectorXd mu(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      mu[i] = inv_logit(eta[i]);
      w[i] = mu[i] * (1.0 - mu[i]);
    }
    info = x.transpose() * w.asDiagonal() * x;
    Eigen::VectorXd score = x.transpose() * (y - mu);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 1e-12).all()) {
      throw FitError(iter == 1 ? "collinear design" : "separation");
    }
    Eigen::VectorXd step = ldlt.solve(score);
    Eigen::VectorXd trial;
    double next_ll = ll;
    double scale = 1.0;
    for (int h = 0; h <= 10; ++h) {
      trial = beta + scale * step;
      next_ll = logistic_loglik(outcome, x, trial);
      if (next_ll >= ll - 1e-12) break;
      scale *= 0.5;
    }
    const double change = next_ll - ll;
    beta = trial;
    ll = next_ll;
    if (beta.cwiseAbs().maxCoeff() > opts.divergence_bound) {
      throw FitError("separation");
    }
    if (std::fabs(change) < opts.tol) {
      converged = true;
      break;
    }
  }
  if (!converged) throw FitError("separation");

  Eigen::VectorXd eta = x * beta;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = inv_logit(eta[i]);
    eta[i] = m * (1.0 - m);
  }
  info = x.transpose() * eta.asDiagonal() * x;
  Eigen::MatrixXd cov = info.inverse();

  FitResult fit;
  fit.converged = true;
  fit.iterations = iter;
  fit.loglik = ll;
  for (Eigen::Index j = 0; j < p; ++j) {
    fit.beta.push_back(beta[j]);
    fit.se.push_back(std::sqrt(cov(j, j)));
  }
  return fit;
}

}  // namespace tsm
