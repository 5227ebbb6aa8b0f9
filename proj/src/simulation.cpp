#include "tsm/simulation.hpp"

#include <algorithm>
#include <cmath>

#include "tsm/cox.hpp"

namespace tsm {

namespace {

void check_hazard_grid(const std::string& field, const PiecewiseHazard& h,
                       const std::vector<double>& grid) {
  if (h.cuts() != grid) {
    throw ScenarioError(field, "cuts differ from the scenario's shared grid");
  }
}

}  // namespace

std::vector<std::string> CrossoverScenario::validate() const {
  std::vector<std::string> warnings;
  if (n_treatment < 1) throw ScenarioError("n_treatment", "must be at least 1");
  if (n_control < 1) throw ScenarioError("n_control", "must be at least 1");
  if (!(accrual_duration >= 0.0) || !std::isfinite(accrual_duration)) {
    throw ScenarioError("accrual_duration", "must be finite and non-negative");
  }
  if (!(readout_time > accrual_duration)) {
    throw ScenarioError("readout_time", "must exceed accrual_duration");
  }
  if (!(pi2 >= 0.0 && pi2 <= 1.0)) {
    throw ScenarioError("pi2", "pi2 must lie in [0,1]");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ScenarioError("alpha", "must lie in (0,1)");
  }
  if (hr_true && !(*hr_true > 0.0)) {
    throw ScenarioError("hr_true", "must be positive");
  }
  const auto& grid = lambda1.cuts();
  check_hazard_grid("lambda3", lambda3, grid);
  check_hazard_grid("lambda2", lambda2, grid);
  check_hazard_grid("lambda2_star", lambda2_star, grid);
  check_hazard_grid("treatment", treatment, grid);
  check_hazard_grid("dropout", dropout, grid);
  if (crossover == CrossoverType::General) {
    if (!general_stay || !general_switch) {
      throw ScenarioError("crossover", "general crossover needs stay and switch hazards");
    }
    if (general_stay->grid != grid || general_switch->grid != grid) {
      throw ScenarioError("crossover", "general hazard grid differs from the shared grid");
    }
  }
  if (!std::isfinite(readout_time)) {
    auto improper = [&](const char* field, const PiecewiseHazard& h) {
      if (h.rates().back() == 0.0) {
        warnings.push_back(std::string(field) +
                           ": last rate is 0, distribution is improper");
      }
    };
    improper("lambda1", lambda1);
    improper("lambda2", lambda2);
    improper("lambda2_star", lambda2_star);
    improper("treatment", treatment);
  }
  return warnings;
}

CrossoverKind CrossoverScenario::stay_kind() const {
  switch (crossover) {
    case CrossoverType::Markov:
      return MarkovCrossover{lambda2};
    case CrossoverType::SemiMarkov:
      return SemiMarkovCrossover{lambda2};
    case CrossoverType::General:
      return *general_stay;
  }
  return SemiMarkovCrossover{lambda2};
}

CrossoverKind CrossoverScenario::switch_kind() const {
  switch (crossover) {
    case CrossoverType::Markov:
      return MarkovCrossover{lambda2_star};
    case CrossoverType::SemiMarkov:
      return SemiMarkovCrossover{lambda2_star};
    case CrossoverType::General:
      return *general_switch;
  }
  return SemiMarkovCrossover{lambda2_star};
}

JointDraw draw_joint(const PiecewiseHazard& lambda1,
                     const PiecewiseHazard& lambda3, const CrossoverKind& kind,
                     Rng& rng) {
  const double x = rng.uniform();
  const double u = lambda3.inverse_survival_or_inf(rng.uniform());
  const double s1u = lambda1.survival(u);
  if (!std::isfinite(u) || x > s1u) {
    // S1(T) = X: the event comes before the crossover event
    return {lambda1.inverse_survival(x), kInfinity};
  }
  return {post_crossover_time(kind, u, x / s1u), u};
}

std::vector<PatientRecord> simulate_trial(const CrossoverScenario& sc, Rng& rng) {
  const CrossoverKind stay = sc.stay_kind();
  const CrossoverKind move = sc.switch_kind();
  std::vector<PatientRecord> out;
  out.reserve(static_cast<std::size_t>(sc.n_treatment + sc.n_control));
  const int n = sc.n_treatment + sc.n_control;
  for (int i = 0; i < n; ++i) {
    PatientRecord r;
    r.id = i + 1;
    r.arm = i < sc.n_treatment ? Arm::Treatment : Arm::Control;
    r.entry = sc.accrual_duration * rng.uniform();
    double t, u = kInfinity;
    bool would_switch = false;
    if (r.arm == Arm::Treatment) {
      t = sc.treatment.inverse_survival(rng.uniform());
    } else {
      would_switch = rng.bernoulli(sc.pi2);
      JointDraw d = draw_joint(sc.lambda1, sc.lambda3, would_switch ? move : stay, rng);
      t = d.event_time;
      u = d.cross_time;
    }
    const double v = sc.dropout.inverse_survival_or_inf(rng.uniform());
    r.admin_time = sc.readout_time - r.entry;
    const double c = std::min(v, r.admin_time);
    r.time = std::min(t, c);
    r.event = t <= c;
    if (u < r.time) {
      r.crossed = true;
      r.cross_time = u;
      r.switched = would_switch;
    }
    out.push_back(r);
  }
  return out;
}

std::vector<PatientRecord> simulate_trial(const CrossoverScenario& sc) {
  Rng rng(sc.seed);
  return simulate_trial(sc, rng);
}

double censoring_fraction(std::span<const PatientRecord> records) {
  if (records.empty()) return 0.0;
  std::size_t censored = 0;
  for (const auto& r : records) censored += r.event ? 0 : 1;
  return static_cast<double>(censored) / static_cast<double>(records.size());
}

double true_working_hr(const CrossoverScenario& sc, bool allow_crossover,
                       int n_per_arm) {
  CrossoverScenario big = sc;
  big.n_treatment = n_per_arm;
  big.n_control = n_per_arm;
  if (!allow_crossover) big.pi2 = 0.0;
  Rng rng(derive_seed(sc.seed, allow_crossover ? 0x77ULL : 0x78ULL));
  auto records = simulate_trial(big, rng);
  SurvDataset data(1);
  for (const auto& r : records) {
    double x = r.arm == Arm::Treatment ? 1.0 : 0.0;
    data.add(0.0, r.time, r.event, std::span<const double>(&x, 1));
  }
  FitResult fit = cox_fit(data);
  return std::exp(fit.beta[0]);
}

}  // namespace tsm
