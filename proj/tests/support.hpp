#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "tsm/hazard.hpp"
#include "tsm/rng.hpp"

namespace tsm::test {

// Asymptotic Kolmogorov tail probability P(K > lambda).
inline double kolmogorov_tail(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = 2.0 * std::pow(-1.0, k - 1) * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::fabs(term) < 1e-15) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

// One-sample KS p-value of `sample` against the continuous CDF `cdf`.
inline double ks_pvalue(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  const double sn = std::sqrt(n);
  return kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d);
}

// Random piecewise hazard on `cuts` with rates in [lo, hi].
inline PiecewiseHazard random_hazard(Rng& rng, const std::vector<double>& cuts, double lo,
                                     double hi) {
  std::vector<double> rates(cuts.size());
  for (auto& r : rates) r = lo + (hi - lo) * rng.uniform();
  return PiecewiseHazard(cuts, rates);
}

// Cumulative hazard by direct summation over pieces.
inline double cumulative_oracle(const std::vector<double>& cuts, const std::vector<double>& rates,
                                double t) {
  double total = 0.0;
  for (std::size_t j = 0; j < rates.size(); ++j) {
    const double a = cuts[j];
    const double b = j + 1 < cuts.size() ? cuts[j + 1] : kInfinity;
    if (t <= a) break;
    total += rates[j] * (std::min(t, b) - a);
  }
  return total;
}

// Golden-section maximiser of a unimodal function on [a, b].
inline double golden_max(const std::function<double(double)>& f, double a, double b,
                         double tol = 1e-10) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// Grid maximiser of f over [lo, hi] with spacing `step`.
inline double grid_max(const std::function<double(double)>& f, double lo, double hi,
                       double step) {
  double best = lo, best_f = f(lo);
  const long n = static_cast<long>(std::llround((hi - lo) / step));
  for (long k = 1; k <= n; ++k) {
    const double x = lo + k * step;
    const double v = f(x);
    if (v > best_f) {
      best_f = v;
      best = x;
    }
  }
  return best;
}

// Coarse-to-fine grid maximiser over a box in any dimension.
inline std::vector<double> zoom_grid_max(const std::function<double(const std::vector<double>&)>& f,
                                         std::vector<double> centre, std::vector<double> half,
                                         int points = 11, int rounds = 40) {
  const std::size_t dim = centre.size();
  for (int round = 0; round < rounds; ++round) {
    std::vector<double> best = centre;
    double best_f = f(centre);
    std::vector<int> idx(dim, 0);
    std::vector<double> x(dim);
    while (true) {
      for (std::size_t j = 0; j < dim; ++j)
        x[j] = centre[j] - half[j] + 2.0 * half[j] * idx[j] / (points - 1);
      const double v = f(x);
      if (v > best_f) {
        best_f = v;
        best = x;
      }
      std::size_t j = 0;
      while (j < dim && ++idx[j] == points) idx[j++] = 0;
      if (j == dim) break;
    }
    centre = best;
    for (auto& h : half) h *= 0.5;
  }
  return centre;
}

}  // namespace tsm::test
