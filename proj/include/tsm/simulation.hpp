#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsm/hazard.hpp"
#include "tsm/rng.hpp"

namespace tsm {

enum class CrossoverType { Markov, SemiMarkov, General };

// Invalid scenario field; `field()` names the offending entry.
class ScenarioError : public std::invalid_argument {
 public:
  ScenarioError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Generative specification of a two-arm trial with crossover in the control
// arm. Durations use the scenario's time unit (years for the presets).
struct CrossoverScenario {
  std::string name = "custom";
  int n_treatment = 200;
  int n_control = 200;
  double accrual_duration = 1.0;  // uniform accrual on (0, accrual_duration)
  double readout_time = 6.0;      // calendar time of analysis
  PiecewiseHazard dropout;
  PiecewiseHazard lambda1;       // entry -> event, no crossover
  PiecewiseHazard lambda3;       // entry -> crossover event
  PiecewiseHazard lambda2;       // after crossover event, stays on control
  PiecewiseHazard lambda2_star;  // after crossover event, switches
  CrossoverType crossover = CrossoverType::SemiMarkov;
  // Used only when crossover == General.
  std::optional<GeneralCrossover> general_stay;
  std::optional<GeneralCrossover> general_switch;
  PiecewiseHazard treatment;  // overall hazard of the experimental arm
  double pi2 = 0.5;           // P(switch | crossover event)
  std::uint64_t seed = 1;
  double alpha = 0.05;
  std::optional<double> hr_true;

  // Throws ScenarioError on an invariant violation; returns warnings.
  std::vector<std::string> validate() const;

  CrossoverKind stay_kind() const;
  CrossoverKind switch_kind() const;
};

enum class Arm : int { Control = 0, Treatment = 1 };

struct PatientRecord {
  int id = 0;
  Arm arm = Arm::Control;
  double entry = 0.0;   // calendar time of randomisation
  double time = 0.0;    // observed duration from entry
  bool event = false;   // death observed at `time`
  bool crossed = false; // crossover event observed before `time`
  double cross_time = kInfinity;  // duration to crossover event, if crossed
  bool switched = false;          // crossed and moved to the experimental arm
  // Potential administrative censoring duration (readout - entry).
  double admin_time = kInfinity;
};

struct JointDraw {
  double event_time;
  double cross_time;  // +inf when no crossover precedes the event
};

// Exact draw of (T, U) for one subject of the three-state model.
JointDraw draw_joint(const PiecewiseHazard& lambda1,
                     const PiecewiseHazard& lambda3, const CrossoverKind& kind,
                     Rng& rng);

std::vector<PatientRecord> simulate_trial(const CrossoverScenario& sc, Rng& rng);
std::vector<PatientRecord> simulate_trial(const CrossoverScenario& sc);

double censoring_fraction(std::span<const PatientRecord> records);

// Monte Carlo working hazard ratio: one very large trial analysed with an
// unadjusted Cox model. Without crossover every control patient keeps the
// control post-progression hazard.
double true_working_hr(const CrossoverScenario& sc, bool allow_crossover,
                       int n_per_arm = 200000);

}  // namespace tsm
