// Acceptance runner: prints one PASS/FAIL line per criterion.
// Usage: tsm_acceptance [study] [design] [censoring] [properties]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "support.hpp"
#include "tsm/adjusters.hpp"
#include "tsm/cox.hpp"
#include "tsm/harness.hpp"
#include "tsm/posterior.hpp"

using namespace tsm;

namespace {

constexpr int kReplications = 2000;
constexpr std::uint64_t kSeed = 20240611;
constexpr double kPi2[4] = {0.25, 0.5, 0.75, 1.0};

constexpr double kIttBias[4] = {0.047, 0.097, 0.145, 0.204};
constexpr double kIttBiasTol = 0.03;
constexpr double kBimmBias[4] = {0.016, 0.020, 0.017, 0.028};
constexpr double kBimmBiasTol = 0.015;
constexpr double kBimmEcp[3] = {0.948, 0.946, 0.946};
constexpr double kBimmEcpTol = 0.025;
constexpr double kRpsftEcpMin = 0.95;
constexpr double kIpcwEcpMax = 0.05;

constexpr double kWorkingHr[4] = {0.544, 0.592, 0.643, 0.699};
constexpr double kWorkingHrTol = 0.01;
constexpr double kHrTrue = 0.5;
constexpr double kHrTrueTol = 0.01;
constexpr double kPower[4] = {0.998, 0.983, 0.922, 0.770};
constexpr double kPowerTol = 0.02;
constexpr double kCensoring[4] = {0.384, 0.400, 0.416, 0.432};
constexpr double kCensoringTol = 0.01;

constexpr double kLowEasEcpMax = 0.05;
constexpr double kHighBimmBias = 0.028;
constexpr double kHighBimmBiasTol = 0.015;

constexpr double kSuiteSeconds = 60.0;
constexpr double kKsMinP = 0.001;
constexpr int kKsDraws = 50000;
constexpr double kCoxGridStep = 1e-4;
constexpr double kCoxTol = 1e-3;
constexpr int kConjugacyDraws = 50000;

int failures = 0;

void report(bool pass, const std::string& name, const std::string& detail) {
  if (!pass) ++failures;
  fmt::print("{} {}: {}\n", pass ? "PASS" : "FAIL", name, detail);
  std::fflush(stdout);
}

void note(const std::string& text) {
  fmt::print("# {}\n", text);
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const MethodSummary& summary(const ReplicationReport& r, MethodId m) {
  for (const auto& s : r.methods)
    if (s.method == m) return s;
  throw std::logic_error("method missing from report");
}

void print_table(const ReplicationReport& r) {
  note(fmt::format("{} pi2={} R={} hr_true={} censoring={:.3f} runtime={:.0f}s", r.scenario.name,
                   r.scenario.pi2, r.R, r.hr_true, r.mean_censoring, r.runtime_seconds));
  for (const auto& s : r.methods) {
    if (s.successes == 0) {
      note(fmt::format("  {:6s} no estimates (failures {})", method_name(s.method), s.failures));
      continue;
    }
    note(fmt::format("  {:6s} bias {:+.3f} se {:.3f} mse {:.4f} ecp {:.1f} power {:.1f} fail {:.3f}",
                     method_name(s.method), s.bias, s.se.value_or(NAN), s.mse, 100 * s.ecp,
                     100 * s.power, s.fail_rate));
  }
}

std::string within(double observed, double target, double tol) {
  return fmt::format("observed {:.4f}, target {:.4f} +/- {:.4f}", observed, target, tol);
}

void study() {
  const auto methods = parse_methods("all");
  std::vector<ReplicationReport> reports;
  for (double pi2 : kPi2) {
    auto sc = preset("exp1-moderate");
    sc.pi2 = pi2;
    reports.push_back(run_replications(sc, methods, kReplications, kSeed, {}));
    print_table(reports.back());
  }
  for (int k = 0; k < 4; ++k) {
    const auto& s = summary(reports[k], MethodId::ITT);
    report(s.successes > 0 && std::fabs(s.bias - kIttBias[k]) <= kIttBiasTol,
           fmt::format("study ITT bias pi2={}", kPi2[k]), within(s.bias, kIttBias[k], kIttBiasTol));
  }
  for (int k = 0; k < 4; ++k) {
    const auto& s = summary(reports[k], MethodId::BIMM);
    report(s.successes > 0 && std::fabs(s.bias - kBimmBias[k]) <= kBimmBiasTol,
           fmt::format("study BIMM bias pi2={}", kPi2[k]),
           within(s.bias, kBimmBias[k], kBimmBiasTol));
  }
  for (int k = 0; k < 3; ++k) {
    const auto& s = summary(reports[k], MethodId::BIMM);
    report(s.successes > 0 && std::fabs(s.ecp - kBimmEcp[k]) <= kBimmEcpTol,
           fmt::format("study BIMM ECP pi2={}", kPi2[k]), within(s.ecp, kBimmEcp[k], kBimmEcpTol));
  }
  for (int k = 0; k < 4; ++k) {
    const auto& s = summary(reports[k], MethodId::RPSFT);
    report(s.successes > 0 && s.ecp >= kRpsftEcpMin, fmt::format("study RPSFT ECP pi2={}", kPi2[k]),
           fmt::format("observed {:.4f}, required >= {:.2f}", s.ecp, kRpsftEcpMin));
  }
  {
    const auto& s = summary(reports[3], MethodId::IPCW);
    report(s.successes > 0 && s.ecp <= kIpcwEcpMax, "study IPCW ECP pi2=1",
           fmt::format("observed {:.4f}, required <= {:.2f}", s.ecp, kIpcwEcpMax));
  }
  const std::vector<MethodId> best{MethodId::RPSFT, MethodId::TSAFT, MethodId::BIMM};
  const std::vector<MethodId> rest{MethodId::ITT, MethodId::CAS, MethodId::EAS, MethodId::TTDV,
                                   MethodId::IPCW};
  for (int k : {2, 3}) {
    double worst_best = 0.0, best_rest = INFINITY;
    std::string missing;
    for (MethodId m : best) {
      const auto& s = summary(reports[k], m);
      if (s.successes == 0) missing += std::string(method_name(m)) + " ";
      else worst_best = std::max(worst_best, std::fabs(s.bias));
    }
    for (MethodId m : rest) {
      const auto& s = summary(reports[k], m);
      if (s.successes == 0) missing += std::string(method_name(m)) + " ";
      else best_rest = std::min(best_rest, std::fabs(s.bias));
    }
    std::string detail = fmt::format("max |bias| of rpsft,tsaft,bimm {:.4f}; min |bias| of "
                                     "itt,cas,eas,ttdv,ipcw {:.4f}",
                                     worst_best, best_rest);
    if (!missing.empty()) detail += "; no estimates from " + missing;
    report(missing.empty() && worst_best < best_rest,
           fmt::format("study ordering pi2={}", kPi2[k]), detail);
  }
}

void design() {
  for (int k = 0; k < 4; ++k) {
    auto sc = preset("exp1-moderate");
    sc.pi2 = kPi2[k];
    const auto d = design_summary(sc, kReplications, kSeed);
    report(std::fabs(d.working_hr - kWorkingHr[k]) <= kWorkingHrTol,
           fmt::format("design working HR pi2={}", kPi2[k]),
           within(d.working_hr, kWorkingHr[k], kWorkingHrTol));
    if (k == 0) {
      report(std::fabs(d.hr_no_crossover - kHrTrue) <= kHrTrueTol, "design HR without crossover",
             within(d.hr_no_crossover, kHrTrue, kHrTrueTol));
    }
    report(std::fabs(d.power - kPower[k]) <= kPowerTol, fmt::format("design power pi2={}", kPi2[k]),
           within(d.power, kPower[k], kPowerTol));
    report(std::fabs(d.censoring - kCensoring[k]) <= kCensoringTol,
           fmt::format("design censoring pi2={}", kPi2[k]),
           within(d.censoring, kCensoring[k], kCensoringTol));
  }
}

void censoring_levels() {
  {
    auto sc = preset("exp1-low");
    sc.pi2 = 1.0;
    const std::vector<MethodId> m{MethodId::EAS};
    const auto r = run_replications(sc, m, kReplications, kSeed, {});
    print_table(r);
    const auto& s = summary(r, MethodId::EAS);
    report(s.successes > 0 && s.ecp <= kLowEasEcpMax, "censoring low EAS ECP pi2=1",
           fmt::format("observed {:.4f}, required <= {:.2f}", s.ecp, kLowEasEcpMax));
  }
  {
    auto sc = preset("exp1-high");
    sc.pi2 = 0.5;
    const std::vector<MethodId> m{MethodId::BIMM};
    const auto r = run_replications(sc, m, kReplications, kSeed, {});
    print_table(r);
    const auto& s = summary(r, MethodId::BIMM);
    report(s.successes > 0 && std::fabs(s.bias - kHighBimmBias) <= kHighBimmBiasTol,
           "censoring high BIMM bias pi2=0.5",
           within(s.bias, kHighBimmBias, kHighBimmBiasTol));
  }
}

// Marginal survival tabulated on a grid and interpolated linearly.
std::function<double(double)> marginal_cdf(const PiecewiseHazard& l1, const PiecewiseHazard& l3,
                                           const CrossoverKind& kind, double t_max) {
  const double step = 0.002;
  const int n = static_cast<int>(std::ceil(t_max / step)) + 1;
  std::vector<double> s(n + 1);
  for (int i = 0; i <= n; ++i) s[i] = marginal_survival(l1, l3, kind, i * step);
  return [s, step, n](double t) {
    const double pos = t / step;
    const int i = std::min(static_cast<int>(pos), n - 1);
    const double w = pos - i;
    return 1.0 - ((1.0 - w) * s[i] + w * s[i + 1]);
  };
}

void rng_fidelity() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(kSeed);
  const std::vector<double> cuts{0.0, 1.0, 2.0, 4.0};
  double min_p = 1.0;
  for (int s = 0; s < 10; ++s) {
    const auto l1 = test::random_hazard(rng, cuts, 0.1, 0.8);
    const auto l3 = test::random_hazard(rng, cuts, 0.1, 0.8);
    const auto l2 = test::random_hazard(rng, cuts, 0.1, 1.5);
    const CrossoverKind kind =
        s % 2 ? CrossoverKind(MarkovCrossover{l2}) : CrossoverKind(SemiMarkovCrossover{l2});
    std::vector<double> t(kKsDraws);
    for (auto& v : t) v = draw_joint(l1, l3, kind, rng).event_time;
    const double t_max = *std::max_element(t.begin(), t.end());
    const double p = test::ks_pvalue(t, marginal_cdf(l1, l3, kind, t_max));
    note(fmt::format("  scenario {} ({}): KS p = {:.4f}", s, s % 2 ? "markov" : "semi-markov", p));
    min_p = std::min(min_p, p);
  }
  const double secs = seconds_since(t0);
  report(min_p > kKsMinP && secs <= kSuiteSeconds, "properties RNG fidelity",
         fmt::format("min KS p {:.4f} over 10 scenarios (required > {}), {:.1f}s", min_p, kKsMinP,
                     secs));
}

void cox_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(kSeed + 1);
  int compared = 0, attempts = 0;
  double worst = 0.0;
  while (compared < 200 && attempts < 5000) {
    ++attempts;
    const int n = 4 + static_cast<int>(rng.index(9));
    std::vector<double> t(n), x(n);
    std::vector<int> e(n);
    SurvDataset data(1);
    for (int i = 0; i < n; ++i) {
      x[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
      t[i] = -std::log(rng.uniform()) * (x[i] > 0 ? 0.6 : 1.0);
      e[i] = rng.bernoulli(0.75);
      data.add(0.0, t[i], e[i] != 0, std::span<const double>(&x[i], 1));
    }
    FitResult fit;
    try {
      fit = cox_fit(data);
    } catch (const FitError&) {
      continue;
    }
    auto ll = [&](double b) {
      double total = 0.0;
      for (int i = 0; i < n; ++i) {
        if (!e[i]) continue;
        double risk = 0.0;
        for (int j = 0; j < n; ++j)
          if (t[j] >= t[i]) risk += std::exp(b * x[j]);
        total += b * x[i] - std::log(risk);
      }
      return total;
    };
    const double grid = test::grid_max(ll, -5.0, 5.0, kCoxGridStep);
    if (std::fabs(grid) > 5.0 - kCoxGridStep) continue;
    ++compared;
    worst = std::max(worst, std::fabs(grid - fit.beta[0]));
  }
  const double secs = seconds_since(t0);
  report(compared == 200 && worst <= kCoxTol && secs <= kSuiteSeconds, "properties Cox oracle",
         fmt::format("{} datasets, max |beta - grid| {:.2e} (required <= {}), {:.1f}s", compared,
                     worst, kCoxTol, secs));
}

void conjugacy() {
  const auto t0 = std::chrono::steady_clock::now();
  auto sc = preset("exp1-moderate");
  sc.pi2 = 0.5;
  Rng rng(kSeed + 2);
  const auto records = simulate_trial(sc, rng);
  const std::vector<double> cuts{0.0, 1.0, 2.0, 3.0, 4.0};
  const auto paths = control_paths(records, CrossoverType::SemiMarkov);
  std::array<ExposureSummary, kPathCount> summary;
  for (int p = 0; p < kPathCount; ++p) summary[p] = summarize_exposure(paths[p], cuts);
  const GammaPrior prior{1.0, 2.0};
  const auto draws = gamma_posterior_draws(summary, cuts, prior, kConjugacyDraws, rng);
  double worst = 0.0;
  for (int p = 0; p < kPathCount; ++p) {
    for (std::size_t j = 0; j < cuts.size(); ++j) {
      const double a = prior.shape + summary[p].events[j];
      const double b = prior.rate + summary[p].exposure[j];
      const double se = std::sqrt(a) / b / std::sqrt(static_cast<double>(kConjugacyDraws));
      const double mean = draws.rates[p].col(static_cast<Eigen::Index>(j)).mean();
      worst = std::max(worst, std::fabs(mean - a / b) / se);
    }
  }
  const double secs = seconds_since(t0);
  report(worst < 3.0 && secs <= kSuiteSeconds, "properties conjugacy",
         fmt::format("max |mean - (a+d)/(b+E)| = {:.2f} SE over 4 paths x 5 intervals (required < 3), "
                     "{:.1f}s",
                     worst, secs));
}

void identity_transforms() {
  const auto t0 = std::chrono::steady_clock::now();
  auto sc = preset("exp1-moderate");
  bool ok = true;
  std::string detail;
  for (int rep = 0; rep < 10; ++rep) {
    sc.pi2 = 0.5;
    Rng rng(replication_seed(kSeed, rep));
    const auto recs = simulate_trial(sc, rng);
    const double b = itt(recs).beta[0];
    const auto cf = rpsft_counterfactual(recs, 0.0, true);
    if (fit_arm_cox(recs, cf.time, cf.event).beta[0] != b) {
      ok = false;
      detail += "rpsft(phi=0) ";
    }
    for (auto clock : {CrossoverType::SemiMarkov, CrossoverType::Markov}) {
      if (std::fabs(bimm_given(recs, sc.lambda2, sc.lambda2, clock).beta[0] - b) > 1e-12) {
        ok = false;
        detail += "bimm(lambda2*=lambda2) ";
      }
    }
    sc.pi2 = 0.0;
    Rng rng0(replication_seed(kSeed, rep));
    const auto none = simulate_trial(sc, rng0);
    const double b0 = itt(none).beta[0];
    for (MethodId m : kAllMethods) {
      const double bm = estimate(m, none, {}, rep).beta[0];
      const bool same = m == MethodId::BIMM ? std::fabs(bm - b0) <= 1e-12 * std::fabs(b0) : bm == b0;
      if (!same) {
        ok = false;
        detail += fmt::format("{}(no switchers) ", method_name(m));
      }
    }
  }
  const double secs = seconds_since(t0);
  report(ok && secs <= kSuiteSeconds, "properties identity transforms",
         fmt::format("10 datasets; {}{:.1f}s", ok ? "all reduce to ITT, " : "mismatch: " + detail,
                     secs));
}

void determinism() {
  const auto t0 = std::chrono::steady_clock::now();
  auto sc = preset("exp1-moderate");
  sc.pi2 = 0.5;
  const auto methods = parse_methods("all");
  RunOptions serial, parallel;
  serial.threads = 1;
  parallel.threads = 8;
  const auto a = report_csv(run_replications(sc, methods, 8, kSeed, serial));
  const auto b = report_csv(run_replications(sc, methods, 8, kSeed, parallel));
  const double secs = seconds_since(t0);
  report(a == b && secs <= kSuiteSeconds, "properties determinism",
         fmt::format("serial and 8-thread reports {} ({} bytes), {:.1f}s",
                     a == b ? "byte-identical" : "differ", a.size(), secs));
}

}  // namespace

int main(int argc, char** argv) {
  std::set<std::string> groups(argv + 1, argv + argc);
  const std::vector<std::string> known{"study", "design", "censoring", "properties"};
  for (const auto& g : groups) {
    if (std::find(known.begin(), known.end(), g) == known.end()) {
      fmt::print(stderr, "unknown group '{}'\n", g);
      return 2;
    }
  }
  auto wanted = [&](const std::string& g) { return groups.empty() || groups.count(g) > 0; };
  if (wanted("properties")) {
    rng_fidelity();
    cox_oracle();
    conjugacy();
    identity_transforms();
    determinism();
  }
  if (wanted("design")) design();
  if (wanted("censoring")) censoring_levels();
  if (wanted("study")) study();
  fmt::print("{} criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
