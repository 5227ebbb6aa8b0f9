#include "tsm/weibull_aft.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace tsm {

namespace {

struct Eval {
  double loglik;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

Eval evaluate(std::span<const double> time, std::span<const int> event,
              const Eigen::MatrixXd& z, const Eigen::VectorXd& theta, bool second) {
  const Eigen::Index q = z.cols();
  const Eigen::Index k = q + 2;
  const double log_sigma = theta[k - 1];
  const double sigma = std::exp(log_sigma);
  Eval e{0.0, Eigen::VectorXd::Zero(k), Eigen::MatrixXd::Zero(second ? k : 0, second ? k : 0)};
  Eigen::VectorXd xrow(k - 1);
  for (std::size_t i = 0; i < time.size(); ++i) {
    const Eigen::Index ii = static_cast<Eigen::Index>(i);
    xrow[0] = 1.0;
    for (Eigen::Index j = 0; j < q; ++j) xrow[j + 1] = z(ii, j);
    const double lin = xrow.dot(theta.head(k - 1));
    const double w = (std::log(time[i]) - lin) / sigma;
    const double ew = std::exp(w);
    const double d = event[i] ? 1.0 : 0.0;
    e.loglik += d * (-log_sigma + w - std::log(time[i])) - ew;
    // derivatives with respect to the linear predictor and log sigma
    const double g_lin = (ew - d) / sigma;
    const double g_ls = -d - w * (d - ew);
    e.grad.head(k - 1) += g_lin * xrow;
    e.grad[k - 1] += g_ls;
    if (second) {
      const double h_ll = -ew / (sigma * sigma);
      const double h_ls = -(w * ew + ew - d) / sigma;
      const double h_ss = w * d - w * ew - w * w * ew;
      e.hess.topLeftCorner(k - 1, k - 1) += h_ll * xrow * xrow.transpose();
      e.hess.block(0, k - 1, k - 1, 1) += h_ls * xrow;
      e.hess(k - 1, k - 1) += h_ss;
    }
  }
  if (second) {
    e.hess.block(k - 1, 0, 1, k - 1) = e.hess.block(0, k - 1, k - 1, 1).transpose();
  }
  return e;
}

}  // namespace

double weibull_aft_loglik(std::span<const double> time, std::span<const int> event,
                          const Eigen::MatrixXd& z, const Eigen::VectorXd& theta) {
  return evaluate(time, event, z, theta, false).loglik;
}

Eigen::VectorXd weibull_aft_score(std::span<const double> time,
                                  std::span<const int> event,
                                  const Eigen::MatrixXd& z,
                                  const Eigen::VectorXd& theta) {
  return evaluate(time, event, z, theta, false).grad;
}

WeibullAftFit weibull_aft_fit(std::span<const double> time, std::span<const int> event,
                              const Eigen::MatrixXd& z, const WeibullAftOptions& opts) {
  const std::size_t n = time.size();
  if (event.size() != n || static_cast<std::size_t>(z.rows()) != n) {
    throw std::invalid_argument("weibull_aft_fit: length mismatch");
  }
  double total_time = 0.0, events = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(time[i] > 0.0)) throw std::invalid_argument("durations must be positive");
    total_time += time[i];
    events += event[i] ? 1.0 : 0.0;
  }
  if (events < 2.0) throw FitError("weibull fit needs at least two events");

  const Eigen::Index q = z.cols();
  const Eigen::Index k = q + 2;
  const double ls_lo = std::log(opts.min_scale), ls_hi = std::log(opts.max_scale);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(k);
  theta[0] = std::log(total_time / events);  // exponential MLE

  Eval cur = evaluate(time, event, z, theta, true);
  bool converged = false;
  int iter = 0;
  while (iter < opts.max_iter) {
    ++iter;
    // Newton direction on the negative Hessian, damped until positive definite
    Eigen::MatrixXd neg = -cur.hess;
    double damping = 0.0;
    Eigen::LDLT<Eigen::MatrixXd> ldlt;
    for (int tries = 0; tries < 30; ++tries) {
      ldlt.compute(neg + damping * Eigen::MatrixXd::Identity(k, k));
      if (ldlt.info() == Eigen::Success && ldlt.isPositive() &&
          (ldlt.vectorD().array() > 0.0).all()) {
        break;
      }
      damping = damping == 0.0 ? 1e-6 * std::max(1.0, neg.diagonal().cwiseAbs().maxCoeff())
                               : damping * 10.0;
    }
    Eigen::VectorXd step = ldlt.solve(cur.grad);
    Eval next;
    Eigen::VectorXd trial;
    double scale = 1.0;
    for (int h = 0; h < 30; ++h) {
      trial = theta + scale * step;
      trial[k - 1] = std::clamp(trial[k - 1], ls_lo, ls_hi);
      next = evaluate(time, event, z, trial, true);
      if (std::isfinite(next.loglik) && next.loglik >= cur.loglik - 1e-12) break;
      scale *= 0.5;
    }
    const double change = next.loglik - cur.loglik;
    theta = trial;
    cur = std::move(next);
    if (std::fabs(change) < opts.tol && cur.grad.cwiseAbs().maxCoeff() < 1e-4) {
      converged = true;
      break;
    }
  }

  WeibullAftFit out;
  out.intercept = theta[0];
  out.log_scale = theta[k - 1];
  out.fit.converged = converged;
  out.fit.iterations = iter;
  out.fit.loglik = cur.loglik;
  Eigen::MatrixXd cov = (-cur.hess).inverse();
  for (Eigen::Index j = 0; j < q; ++j) {
    out.fit.beta.push_back(theta[j + 1]);
    out.fit.se.push_back(std::sqrt(cov(j + 1, j + 1)));
  }
  out.fit.info["intercept"] = theta[0];
  out.fit.info["scale"] = std::exp(theta[k - 1]);
  return out;
}

}  // namespace tsm
