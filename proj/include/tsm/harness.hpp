#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tsm/adjusters.hpp"
#include "tsm/simulation.hpp"

namespace tsm {

// Built-in scenarios: exp1-moderate, exp1-low, exp1-high.
CrossoverScenario preset(std::string_view name);
std::vector<std::string> preset_names();

struct ReplicationEstimate {
  int rep = 0;
  bool ok = false;
  double beta = 0.0;
  double se = 0.0;
  double hr = 0.0;
  double ci_lo = 0.0;  // HR scale
  double ci_hi = 0.0;
  std::string error;
};

struct MethodSummary {
  MethodId method = MethodId::ITT;
  int successes = 0;
  int failures = 0;
  double fail_rate = 0.0;
  bool flagged = false;  // fail_rate above 5%
  double mean_hr = 0.0;
  double bias = 0.0;
  std::optional<double> se;  // absent when fewer than two estimates
  double mse = 0.0;
  double ecp = 0.0;
  double power = 0.0;
  double mean_ci_lo = 0.0;
  double mean_ci_hi = 0.0;
  std::vector<ReplicationEstimate> replications;
};

struct ReplicationReport {
  CrossoverScenario scenario;
  double hr_true = 0.0;
  int R = 0;
  std::uint64_t seed = 0;
  double runtime_seconds = 0.0;
  double mean_censoring = 0.0;
  std::vector<MethodSummary> methods;
};

struct RunOptions {
  int threads = 0;  // 0 = hardware concurrency
  AdjusterConfig adjusters;
  bool keep_replications = true;
};

int resolve_threads(int requested);

// Seed of replication `rep` and of method `m` inside it.
std::uint64_t replication_seed(std::uint64_t base, int rep);
std::uint64_t method_seed(std::uint64_t rep_seed, MethodId m);

ReplicationReport run_replications(const CrossoverScenario& sc,
                                   std::span<const MethodId> methods, int R,
                                   std::uint64_t seed, const RunOptions& opts = {});

// Fraction of replications whose two-sided log-rank p-value is below alpha.
double power_summary(const CrossoverScenario& sc, int R, std::uint64_t seed, int threads = 0);

struct DesignSummary {
  double working_hr = 0.0;       // with crossover
  double hr_no_crossover = 0.0;  // every control patient stays on control
  double power = 0.0;
  double censoring = 0.0;
};

DesignSummary design_summary(const CrossoverScenario& sc, int R, std::uint64_t seed,
                             int threads = 0);

std::string report_csv(const ReplicationReport& report, bool header = true);
std::string report_json(const ReplicationReport& report);

}  // namespace tsm
