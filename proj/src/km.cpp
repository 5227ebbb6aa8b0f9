#include "tsm/km.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tsm/surv_data.hpp"

namespace tsm {

double StepFunction::operator()(double t) const {
  auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 1.0;
  return values[static_cast<std::size_t>(it - times.begin()) - 1];
}

StepFunction km_estimate(std::span<const double> time, std::span<const int> event,
                         std::span<const double> weight) {
  const std::size_t n = time.size();
  if (event.size() != n || (!weight.empty() && weight.size() != n)) {
    throw std::invalid_argument("km_estimate: length mismatch");
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return time[a] < time[b]; });
  auto w = [&](std::size_t i) { return weight.empty() ? 1.0 : weight[i]; };

  double at_risk = 0.0;
  for (std::size_t i = 0; i < n; ++i) at_risk += w(i);

  StepFunction out;
  double s = 1.0;
  for (std::size_t k = 0; k < n;) {
    const double t = time[idx[k]];
    double d = 0.0, leaving = 0.0;
    for (; k < n && time[idx[k]] == t; ++k) {
      leaving += w(idx[k]);
      if (event[idx[k]]) d += w(idx[k]);
    }
    if (d > 0.0) {
      s *= 1.0 - d / at_risk;
      out.times.push_back(t);
      out.values.push_back(s);
      out.at_risk.push_back(at_risk);
      out.events.push_back(d);
    }
    at_risk -= leaving;
  }
  return out;
}

LogRank logrank(std::span<const double> time, std::span<const int> event,
                std::span<const int> group) {
  const std::size_t n = time.size();
  if (event.size() != n || group.size() != n) {
    throw std::invalid_argument("logrank: length mismatch");
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return time[a] < time[b]; });

  double n_all = static_cast<double>(n);
  double n_one = 0.0;
  for (int g : group) n_one += g == 1 ? 1.0 : 0.0;

  double observed = 0.0, expected = 0.0, variance = 0.0;
  bool any_event = false;
  for (std::size_t k = 0; k < n;) {
    const double t = time[idx[k]];
    double d = 0.0, d_one = 0.0, leave = 0.0, leave_one = 0.0;
    for (; k < n && time[idx[k]] == t; ++k) {
      const std::size_t i = idx[k];
      const bool one = group[i] == 1;
      leave += 1.0;
      leave_one += one ? 1.0 : 0.0;
      if (event[i]) {
        d += 1.0;
        d_one += one ? 1.0 : 0.0;
      }
    }
    if (d > 0.0) {
      any_event = true;
      const double frac = n_one / n_all;
      observed += d_one;
      expected += d * frac;
      if (n_all > 1.0) {
        variance += d * frac * (1.0 - frac) * (n_all - d) / (n_all - 1.0);
      }
    }
    n_all -= leave;
    n_one -= leave_one;
  }
  if (!any_event) throw FitError("no events");
  LogRank lr{};
  lr.observed = observed;
  lr.expected = expected;
  lr.variance = variance;
  lr.z = variance > 0.0 ? (observed - expected) / std::sqrt(variance) : 0.0;
  lr.chi2 = lr.z * lr.z;
  return lr;
}

double logrank_pvalue(const LogRank& lr) {
  return std::erfc(std::fabs(lr.z) / std::sqrt(2.0));
}

}  // namespace tsm
