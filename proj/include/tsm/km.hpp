#pragma once

#include <span>
#include <vector>

namespace tsm {

// Right-continuous step function S(t) with jumps at `times`.
struct StepFunction {
  std::vector<double> times;
  std::vector<double> values;  // S just after times[k]
  std::vector<double> at_risk;
  std::vector<double> events;

  double operator()(double t) const;
};

// Product-limit estimator; optional case weights.
StepFunction km_estimate(std::span<const double> time, std::span<const int> event,
                         std::span<const double> weight = {});

struct LogRank {
  double chi2;
  double z;  // (O - E) / sqrt(V) for the group coded 1
  double observed;
  double expected;
  double variance;
};

// Two-sample log-rank test with the hypergeometric variance.
LogRank logrank(std::span<const double> time, std::span<const int> event,
                std::span<const int> group);

// Two-sided normal p-value of the log-rank statistic.
double logrank_pvalue(const LogRank& lr);

}  // namespace tsm
