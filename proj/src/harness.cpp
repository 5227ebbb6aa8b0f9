#include "tsm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "tsm/km.hpp"
#include "tsm/scenario_io.hpp"

namespace tsm {

namespace {

constexpr double kZ975 = 1.959963984540054;

// Runs body(i) for i in [0, n) on a pool; the first exception is rethrown.
template <class F>
void parallel_for(int n, int threads, F&& body) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

CrossoverScenario base_preset() {
  const std::vector<double> cuts = {0.0, 1.0, 2.0};
  const PiecewiseHazard l1(cuts, {0.2, 0.2, 0.25});
  CrossoverScenario sc;
  sc.n_treatment = 200;
  sc.n_control = 200;
  sc.lambda1 = l1;
  sc.lambda3 = PiecewiseHazard::constant_on(cuts, 0.4);
  sc.lambda2 = l1.scaled(1.5);
  sc.lambda2_star = l1.scaled(0.8);
  sc.treatment = PiecewiseHazard(cuts, {0.12, 0.12, 0.15});
  sc.crossover = CrossoverType::SemiMarkov;
  sc.pi2 = 0.5;
  sc.alpha = 0.05;
  return sc;
}

// z with P(|Z| > z) = alpha
double two_sided_critical(double alpha) {
  double lo = 0.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std::erfc(mid / std::sqrt(2.0)) > alpha ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

CrossoverScenario preset(std::string_view name) {
  CrossoverScenario sc = base_preset();
  sc.name = std::string(name);
  if (name == "exp1-moderate") {
    sc.accrual_duration = 1.0;
    sc.readout_time = 6.0;
    sc.dropout = PiecewiseHazard::constant_on(sc.lambda1.cuts(), 0.02);
    sc.hr_true = 0.5;
  } else if (name == "exp1-low") {
    sc.accrual_duration = 1.0;
    sc.readout_time = 8.0;
    sc.dropout = PiecewiseHazard::constant_on(sc.lambda1.cuts(), 0.02);
    sc.hr_true = 0.489;
  } else if (name == "exp1-high") {
    sc.accrual_duration = 2.0;
    sc.readout_time = 5.0;
    sc.dropout = PiecewiseHazard::constant_on(sc.lambda1.cuts(), 0.025);
    sc.hr_true = 0.514;
  } else {
    throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
  }
  return sc;
}

std::vector<std::string> preset_names() { return {"exp1-moderate", "exp1-low", "exp1-high"}; }

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::uint64_t replication_seed(std::uint64_t base, int rep) {
  return derive_seed(base, static_cast<std::uint64_t>(rep));
}

std::uint64_t method_seed(std::uint64_t rep_seed, MethodId m) {
  return derive_seed(rep_seed, 1000 + static_cast<std::uint64_t>(m));
}

ReplicationReport run_replications(const CrossoverScenario& sc,
                                   std::span<const MethodId> methods, int R,
                                   std::uint64_t seed, const RunOptions& opts) {
  if (R < 1) throw std::invalid_argument("R must be at least 1");
  sc.validate();
  opts.adjusters.validate();
  const auto start = std::chrono::steady_clock::now();

  ReplicationReport report;
  report.scenario = sc;
  report.R = R;
  report.seed = seed;
  report.hr_true = sc.hr_true ? *sc.hr_true : true_working_hr(sc, false);

  const std::size_t M = methods.size();
  std::vector<ReplicationEstimate> grid(static_cast<std::size_t>(R) * M);
  std::vector<double> censoring(static_cast<std::size_t>(R));

  parallel_for(R, resolve_threads(opts.threads), [&](int rep) {
    const std::uint64_t rs = replication_seed(seed, rep);
    Rng rng(rs);
    const auto records = simulate_trial(sc, rng);
    censoring[static_cast<std::size_t>(rep)] = censoring_fraction(records);
    for (std::size_t m = 0; m < M; ++m) {
      ReplicationEstimate& e = grid[static_cast<std::size_t>(rep) * M + m];
      e.rep = rep;
      try {
        const FitResult fit = estimate(methods[m], records, opts.adjusters,
                                       method_seed(rs, methods[m]));
        e.beta = fit.beta[0];
        e.se = fit.se[0];
        if (!std::isfinite(e.beta) || !std::isfinite(e.se)) {
          throw FitError("non-finite estimate");
        }
        e.hr = std::exp(e.beta);
        e.ci_lo = std::exp(e.beta - kZ975 * e.se);
        e.ci_hi = std::exp(e.beta + kZ975 * e.se);
        e.ok = true;
      } catch (const std::exception& ex) {
        e.ok = false;
        e.error = ex.what();
      }
    }
  });

  double cens = 0.0;
  for (double c : censoring) cens += c;
  report.mean_censoring = cens / R;

  const double z_crit = two_sided_critical(sc.alpha);

  for (std::size_t m = 0; m < M; ++m) {
    MethodSummary s;
    s.method = methods[m];
    double sum = 0.0, sum_sq = 0.0, lo = 0.0, hi = 0.0;
    int cover = 0, reject = 0;
    for (int rep = 0; rep < R; ++rep) {
      const auto& e = grid[static_cast<std::size_t>(rep) * M + m];
      if (opts.keep_replications) s.replications.push_back(e);
      if (!e.ok) {
        ++s.failures;
        continue;
      }
      ++s.successes;
      sum += e.hr;
      sum_sq += e.hr * e.hr;
      lo += e.ci_lo;
      hi += e.ci_hi;
      cover += (e.ci_lo <= report.hr_true && report.hr_true <= e.ci_hi) ? 1 : 0;
      reject += (e.se > 0.0 && std::fabs(e.beta / e.se) > z_crit) ? 1 : 0;
    }
    s.fail_rate = static_cast<double>(s.failures) / R;
    s.flagged = s.fail_rate > 0.05;
    if (s.successes > 0) {
      const double n = s.successes;
      s.mean_hr = sum / n;
      s.bias = s.mean_hr - report.hr_true;
      if (s.successes > 1) {
        s.se = std::sqrt(std::max(0.0, (sum_sq - n * s.mean_hr * s.mean_hr) / (n - 1.0)));
      }
      s.mse = s.bias * s.bias + (s.se ? *s.se * *s.se : 0.0);
      s.ecp = cover / n;
      s.power = reject / n;
      s.mean_ci_lo = lo / n;
      s.mean_ci_hi = hi / n;
    }
    report.methods.push_back(std::move(s));
  }
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

double power_summary(const CrossoverScenario& sc, int R, std::uint64_t seed, int threads) {
  if (R < 1) throw std::invalid_argument("R must be at least 1");
  sc.validate();
  std::vector<int> reject(static_cast<std::size_t>(R), 0);
  parallel_for(R, resolve_threads(threads), [&](int rep) {
    Rng rng(replication_seed(seed, rep));
    const auto records = simulate_trial(sc, rng);
    std::vector<double> time(records.size());
    std::vector<int> event(records.size()), group(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
      time[i] = records[i].time;
      event[i] = records[i].event;
      group[i] = records[i].arm == Arm::Treatment;
    }
    try {
      reject[static_cast<std::size_t>(rep)] = logrank_pvalue(logrank(time, event, group)) < sc.alpha;
    } catch (const FitError&) {
      reject[static_cast<std::size_t>(rep)] = 0;
    }
  });
  double total = 0.0;
  for (int r : reject) total += r;
  return total / R;
}

DesignSummary design_summary(const CrossoverScenario& sc, int R, std::uint64_t seed,
                             int threads) {
  sc.validate();
  DesignSummary d;
  d.working_hr = true_working_hr(sc, true);
  d.hr_no_crossover = true_working_hr(sc, false);
  d.power = power_summary(sc, R, seed, threads);
  std::vector<double> cens(static_cast<std::size_t>(R));
  parallel_for(R, resolve_threads(threads), [&](int rep) {
    Rng rng(replication_seed(seed, rep));
    cens[static_cast<std::size_t>(rep)] = censoring_fraction(simulate_trial(sc, rng));
  });
  double total = 0.0;
  for (double c : cens) total += c;
  d.censoring = total / R;
  return d;
}

std::string report_csv(const ReplicationReport& report, bool header) {
  std::string out;
  if (header) out += "scenario,pi2,method,R,bias,se,mse,ecp,power,fail_rate\n";
  for (const auto& s : report.methods) {
    // statistics are blank when every replication failed
    auto stat = [&](double v) { return s.successes > 0 ? fmt::format("{}", v) : std::string(); };
    out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", report.scenario.name,
                       report.scenario.pi2, method_name(s.method), report.R, stat(s.bias),
                       s.se ? fmt::format("{}", *s.se) : std::string(), stat(s.mse),
                       stat(s.ecp), stat(s.power), s.fail_rate);
  }
  return out;
}

std::string report_json(const ReplicationReport& report) {
  using nlohmann::json;
  json j;
  j["scenario"] = scenario_to_json(report.scenario);
  j["hr_true"] = report.hr_true;
  j["R"] = report.R;
  j["seed"] = report.seed;
  j["runtime_seconds"] = report.runtime_seconds;
  j["mean_censoring"] = report.mean_censoring;
  json methods = json::array();
  for (const auto& s : report.methods) {
    json m;
    m["method"] = method_name(s.method);
    m["successes"] = s.successes;
    m["failures"] = s.failures;
    m["fail_rate"] = s.fail_rate;
    m["flagged"] = s.flagged;
    auto stat = [&](double v) { return s.successes > 0 ? json(v) : json(nullptr); };
    m["mean_hr"] = stat(s.mean_hr);
    m["bias"] = stat(s.bias);
    m["se"] = s.se ? json(*s.se) : json(nullptr);
    m["mse"] = stat(s.mse);
    m["ecp"] = stat(s.ecp);
    m["power"] = stat(s.power);
    m["mean_ci"] = s.successes > 0 ? json{s.mean_ci_lo, s.mean_ci_hi} : json(nullptr);
    json reps = json::array();
    for (const auto& e : s.replications) {
      json r;
      r["rep"] = e.rep;
      r["ok"] = e.ok;
      if (e.ok) {
        r["beta"] = e.beta;
        r["se"] = e.se;
        r["hr"] = e.hr;
        r["ci"] = {e.ci_lo, e.ci_hi};
      } else {
        r["error"] = e.error;
      }
      reps.push_back(std::move(r));
    }
    m["replications"] = std::move(reps);
    methods.push_back(std::move(m));
  }
  j["methods"] = std::move(methods);
  return j.dump(2);
}

}  // namespace tsm
