#include "tsm/cox.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>

#include <Eigen/Dense>

namespace tsm {

namespace {

// Subjects ordered by decreasing stop and decreasing start; computed once per
// fit and reused across Newton iterations.
struct RiskOrder {
  std::vector<std::size_t> by_stop;
  std::vector<std::size_t> by_start;
  bool has_late_entry = false;

  explicit RiskOrder(const SurvDataset& d) {
    const std::size_t n = d.size();
    by_stop.resize(n);
    std::iota(by_stop.begin(), by_stop.end(), std::size_t{0});
    const auto& stop = d.stops();
    // ties in stop: events first, so a tied censored row never hides an event
    std::sort(by_stop.begin(), by_stop.end(), [&](std::size_t a, std::size_t b) {
      if (stop[a] != stop[b]) return stop[a] > stop[b];
      return d.event(a) > d.event(b);
    });
    const auto& start = d.starts();
    for (double s : start) {
      if (s != 0.0) {
        has_late_entry = true;
        break;
      }
    }
    if (has_late_entry) {
      by_start.resize(n);
      std::iota(by_start.begin(), by_start.end(), std::size_t{0});
      std::sort(by_start.begin(), by_start.end(),
                [&](std::size_t a, std::size_t b) { return start[a] > start[b]; });
    }
  }
};

CoxDerivatives derivatives(const SurvDataset& d, const RiskOrder& order,
                           std::span<const double> beta, Ties ties) {
  const std::size_t n = d.size();
  const std::size_t p = d.covariates();
  std::vector<double> eta(n);
  double eta_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    double e = 0.0;
    for (std::size_t j = 0; j < p; ++j) e += d.x(i, j) * beta[j];
    eta[i] = e;
    eta_max = std::max(eta_max, e);
  }
  std::vector<double> risk(n);
  for (std::size_t i = 0; i < n; ++i) {
    risk[i] = d.weight(i) * std::exp(eta[i] - eta_max);
  }

  CoxDerivatives out;
  out.score = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  out.information = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p),
                                          static_cast<Eigen::Index>(p));
  std::vector<double> s1(p, 0.0), s2(p * p, 0.0);
  std::vector<double> d1(p, 0.0), d2(p * p, 0.0);
  std::vector<double> a(p);
  double s0 = 0.0;
  double loglik = 0.0;

  auto accumulate = [&](std::size_t i, double sign, double& z0,
                        std::vector<double>& z1, std::vector<double>& z2) {
    const double r = sign * risk[i];
    z0 += r;
    for (std::size_t j = 0; j < p; ++j) {
      const double xj = d.x(i, j);
      z1[j] += r * xj;
      for (std::size_t k = 0; k <= j; ++k) z2[j * p + k] += r * xj * d.x(i, k);
    }
  };

  std::size_t i_stop = 0, i_start = 0;
  while (i_stop < n) {
    const double t = d.stop(order.by_stop[i_stop]);
    double d0 = 0.0, deadwt = 0.0;
    int ndead = 0;
    std::fill(d1.begin(), d1.end(), 0.0);
    std::fill(d2.begin(), d2.end(), 0.0);
    for (; i_stop < n && d.stop(order.by_stop[i_stop]) == t; ++i_stop) {
      const std::size_t i = order.by_stop[i_stop];
      accumulate(i, 1.0, s0, s1, s2);
      if (d.event(i)) {
        accumulate(i, 1.0, d0, d1, d2);
        ++ndead;
        deadwt += d.weight(i);
        loglik += d.weight(i) * (eta[i] - eta_max);
        for (std::size_t j = 0; j < p; ++j) {
          out.score[static_cast<Eigen::Index>(j)] += d.weight(i) * d.x(i, j);
        }
      }
    }
    if (order.has_late_entry) {
      for (; i_start < n && d.start(order.by_start[i_start]) >= t; ++i_start) {
        accumulate(order.by_start[i_start], -1.0, s0, s1, s2);
      }
    }
    if (ndead == 0) continue;
    const double meanwt = deadwt / ndead;
    for (int k = 0; k < ndead; ++k) {
      const double frac = ties == Ties::Efron ? static_cast<double>(k) / ndead : 0.0;
      const double denom = s0 - frac * d0;
      loglik -= meanwt * std::log(denom);
      for (std::size_t j = 0; j < p; ++j) {
        a[j] = (s1[j] - frac * d1[j]) / denom;
        out.score[static_cast<Eigen::Index>(j)] -= meanwt * a[j];
      }
      for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t l = 0; l <= j; ++l) {
          const double v = (s2[j * p + l] - frac * d2[j * p + l]) / denom - a[j] * a[l];
          out.information(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l)) +=
              meanwt * v;
        }
      }
    }
  }
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t l = 0; l < j; ++l) {
      out.information(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(j)) =
          out.information(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l));
    }
  }
  out.loglik = loglik;
  return out;
}

// Single covariate without late entry: rows copied once into contiguous
// arrays sorted by decreasing stop, grouped by tied stop times.
struct Flat1 {
  std::vector<double> x, w;
  std::vector<std::uint8_t> ev;
  std::vector<std::size_t> group_end;

  explicit Flat1(const SurvDataset& d) {
    const std::size_t n = d.size();
    struct Key {
      double stop;
      std::uint8_t ev;
      std::size_t i;
    };
    std::vector<Key> keys(n);
    for (std::size_t i = 0; i < n; ++i) {
      keys[i] = {d.stop(i), static_cast<std::uint8_t>(d.event(i) ? 1 : 0), i};
    }
    std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
      if (a.stop != b.stop) return a.stop > b.stop;
      return a.ev > b.ev;
    });
    x.resize(n);
    w.resize(n);
    ev.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      x[k] = d.x(keys[k].i, 0);
      w[k] = d.weight(keys[k].i);
      ev[k] = keys[k].ev;
      if (k + 1 == n || keys[k + 1].stop != keys[k].stop) group_end.push_back(k + 1);
    }
  }
};

CoxDerivatives derivatives1(const Flat1& f, double beta, Ties ties) {
  const std::size_t n = f.x.size();
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) shift = std::max(shift, f.x[i] * beta);
  // indicator covariates need only two exponentials
  const double e0 = std::exp(-shift), e1 = std::exp(beta - shift);
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, loglik = 0.0, score = 0.0, info = 0.0;
  std::size_t i = 0;
  for (const std::size_t end : f.group_end) {
    double d0 = 0.0, d1 = 0.0, d2 = 0.0, deadwt = 0.0;
    int ndead = 0;
    for (; i < end; ++i) {
      const double xi = f.x[i];
      const double eta = xi * beta - shift;
      const double r = f.w[i] * (xi == 0.0 ? e0 : xi == 1.0 ? e1 : std::exp(eta));
      s0 += r;
      s1 += r * xi;
      s2 += r * xi * xi;
      if (f.ev[i]) {
        d0 += r;
        d1 += r * xi;
        d2 += r * xi * xi;
        ++ndead;
        deadwt += f.w[i];
        loglik += f.w[i] * eta;
        score += f.w[i] * xi;
      }
    }
    if (ndead == 0) continue;
    const double meanwt = deadwt / ndead;
    for (int k = 0; k < ndead; ++k) {
      const double frac = ties == Ties::Efron ? static_cast<double>(k) / ndead : 0.0;
      const double denom = s0 - frac * d0;
      const double a = (s1 - frac * d1) / denom;
      loglik -= meanwt * std::log(denom);
      score -= meanwt * a;
      info += meanwt * ((s2 - frac * d2) / denom - a * a);
    }
  }
  CoxDerivatives out;
  out.loglik = loglik;
  out.score = Eigen::VectorXd::Constant(1, score);
  out.information = Eigen::MatrixXd::Constant(1, 1, info);
  return out;
}

}  // namespace

CoxDerivatives cox_derivatives(const SurvDataset& data,
                               std::span<const double> beta, Ties ties) {
  RiskOrder order(data);
  return derivatives(data, order, beta, ties);
}

FitResult cox_fit(const SurvDataset& data, const CoxOptions& opts) {
  const std::size_t p = data.covariates();
  if (data.events() == 0) throw FitError("no events");
  if (p == 0) throw std::invalid_argument("cox_fit needs at least one covariate");
  const bool late_entry =
      std::any_of(data.starts().begin(), data.starts().end(), [](double s) { return s != 0.0; });
  std::optional<Flat1> flat;
  std::optional<RiskOrder> order;
  if (p == 1 && !late_entry) flat.emplace(data);
  else order.emplace(data);
  auto eval = [&](const std::vector<double>& b) {
    return flat ? derivatives1(*flat, b[0], opts.ties) : derivatives(data, *order, b, opts.ties);
  };

  std::vector<double> beta = opts.init.empty() ? std::vector<double>(p, 0.0) : opts.init;
  if (beta.size() != p) throw std::invalid_argument("cox_fit: init has the wrong length");
  CoxDerivatives cur = eval(beta);

  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cur.information,
                                                       Eigen::EigenvaluesOnly);
    const double top = eig.eigenvalues().maxCoeff();
    const double bottom = eig.eigenvalues().minCoeff();
    if (!(bottom > 1e-10 * std::max(1.0, top))) {
      throw FitError("collinear covariates");
    }
  }

  FitResult fit;
  fit.converged = false;
  int iter = 0;
  while (iter < opts.max_iter) {
    ++iter;
    Eigen::VectorXd step = cur.information.ldlt().solve(cur.score);
    std::vector<double> trial(p);
    CoxDerivatives next;
    double scale = 1.0;
    for (int h = 0; h <= opts.max_halving; ++h) {
      for (std::size_t j = 0; j < p; ++j) {
        trial[j] = beta[j] + scale * step[static_cast<Eigen::Index>(j)];
      }
      next = eval(trial);
      if (std::isfinite(next.loglik) && next.loglik >= cur.loglik - 1e-12) break;
      scale *= 0.5;
    }
    const double change = next.loglik - cur.loglik;
    beta = trial;
    cur = std::move(next);
    if (std::fabs(change) < opts.tol) {
      fit.converged = true;
      break;
    }
  }

  fit.beta = beta;
  fit.loglik = cur.loglik;
  fit.iterations = iter;
  Eigen::MatrixXd cov = cur.information.inverse();
  fit.se.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    fit.se[j] = std::sqrt(cov(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)));
    if (std::fabs(beta[j]) > 15.0 || !std::isfinite(fit.se[j])) {
      throw FitError("infinite estimate");
    }
  }
  return fit;
}

double cox_score_test(const SurvDataset& data, Ties ties) {
  std::vector<double> zero(data.covariates(), 0.0);
  CoxDerivatives d = cox_derivatives(data, zero, ties);
  Eigen::VectorXd sol = d.information.ldlt().solve(d.score);
  return d.score.dot(sol);
}

}  // namespace tsm
