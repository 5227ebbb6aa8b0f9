#include "tsm/adjusters.hpp"

namespace tsm {

// Switchers censored at the crossover event.
FitResult cas(std::span<const PatientRecord> records, const AdjusterConfig& cfg) {
  std::vector<double> time(records.size());
  std::vector<int> event(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.switched) {
      time[i] = r.cross_time;
      event[i] = 0;
    } else {
      time[i] = r.time;
      event[i] = r.event;
    }
  }
  return fit_arm_cox(records, time, event, cfg.ties);
}

// Switchers removed from the analysis.
FitResult eas(std::span<const PatientRecord> records, const AdjusterConfig& cfg) {
  std::vector<PatientRecord> kept;
  kept.reserve(records.size());
  int control_events = 0;
  for (const auto& r : records) {
    if (r.switched) continue;
    kept.push_back(r);
    if (r.arm == Arm::Control && r.event) ++control_events;
  }
  if (control_events == 0) throw FitError("no control information");
  return itt(kept, cfg);
}

}  // namespace tsm
